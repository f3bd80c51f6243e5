#include "epf/backtest.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "epf/errors.hpp"

namespace epf {

namespace {

struct SelectionAccumulator {
    SelectionCounts sc;
    std::vector<std::vector<int>> col_to_row;  // per hour (multivariate) or single (univariate)
    std::mutex mu;
};

void setup_selection(const ModelSpec& spec, SelectionAccumulator& acc) {
    if (spec.family == Family::Lasso24) {
        acc.sc.params = lasso24_column_names(spec, 1);  // hour 1 carries the full layout
        std::unordered_map<std::string, int> row;
        for (size_t i = 0; i < acc.sc.params.size(); ++i)
            row.emplace(acc.sc.params[i], static_cast<int>(i));
        acc.sc.counts = Eigen::MatrixXi::Zero(static_cast<long>(acc.sc.params.size()), 24);
        acc.sc.exists = Eigen::MatrixXi::Zero(static_cast<long>(acc.sc.params.size()), 24);
        acc.col_to_row.resize(24);
        for (int h = 1; h <= 24; ++h) {
            const auto names = lasso24_column_names(spec, h);
            auto& map = acc.col_to_row[static_cast<size_t>(h - 1)];
            map.reserve(names.size());
            for (const auto& n : names) {
                const int r = row.at(n);
                map.push_back(r);
                acc.sc.exists(r, h - 1) = 1;
            }
        }
    } else {
        acc.sc.params = lasso_uni_column_names(spec);
        acc.sc.counts = Eigen::MatrixXi::Zero(static_cast<long>(acc.sc.params.size()), 1);
        acc.sc.exists = Eigen::MatrixXi::Ones(static_cast<long>(acc.sc.params.size()), 1);
        acc.col_to_row.resize(1);
        auto& map = acc.col_to_row[0];
        for (size_t i = 0; i < acc.sc.params.size(); ++i) map.push_back(static_cast<int>(i));
    }
}

void accumulate_selection(const FittedModel& fit, SelectionAccumulator& acc) {
    std::lock_guard<std::mutex> lock(acc.mu);
    acc.sc.windows += 1;
    if (const auto* f = std::get_if<Lasso24Fit>(&fit.detail)) {
        for (int h = 1; h <= 24; ++h) {
            const auto& beta = f->hours[static_cast<size_t>(h - 1)].beta;
            const auto& map = acc.col_to_row[static_cast<size_t>(h - 1)];
            for (long j = 0; j < beta.size(); ++j)
                if (beta(j) != 0.0) acc.sc.counts(map[static_cast<size_t>(j)], h - 1) += 1;
        }
    } else if (const auto* g = std::get_if<LassoUniFit>(&fit.detail)) {
        const auto& beta = g->fit.beta;
        for (long j = 0; j < beta.size(); ++j)
            if (beta(j) != 0.0) acc.sc.counts(j, 0) += 1;
    }
}

}  // namespace

const ForecastMatrix& BacktestRun::forecast_for(const std::string& model_id) const {
    for (size_t i = 0; i < specs.size(); ++i)
        if (specs[i].id() == model_id) return forecasts[i];
    throw DataError("no forecasts for model '" + model_id + "' in this run");
}

BacktestRun run_backtest(const PriceSeries& series, const std::vector<ModelSpec>& specs,
                         const WindowPlan& plan, const BacktestOptions& opts) {
    plan.validate();
    if (specs.empty()) throw DataError("backtest: no models requested");
    if (plan.last_forecast_day >= series.days())
        throw DataError("backtest: plan extends past the end of the series");

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<long> days = plan.forecast_days();
    const long n_days = static_cast<long>(days.size());

    BacktestRun run;
    run.plan = plan;
    run.specs = specs;
    run.transforms.resize(static_cast<size_t>(n_days));
    run.forecasts.resize(specs.size());
    for (size_t s = 0; s < specs.size(); ++s) {
        auto& fm = run.forecasts[s];
        fm.model_id = specs[s].id();
        fm.forecasts.resize(n_days, 24);
        fm.dates.resize(static_cast<size_t>(n_days));
        for (long i = 0; i < n_days; ++i)
            fm.dates[static_cast<size_t>(i)] = series.date_of(days[static_cast<size_t>(i)]);
    }

    std::vector<std::unique_ptr<SelectionAccumulator>> accs(specs.size());
    for (size_t s = 0; s < specs.size(); ++s) {
        if (!is_lasso(specs[s])) continue;
        accs[s] = std::make_unique<SelectionAccumulator>();
        setup_selection(specs[s], *accs[s]);
    }

    std::atomic<long> next{0};
    std::mutex err_mu;
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n_days || failed.load()) return;
            try {
                const long t = days[static_cast<size_t>(i)];
                const CalibWindow w = window(series, plan, t);
                const WindowContext ctx = make_context(w.prices, w.weekday0);
                run.transforms[static_cast<size_t>(i)] = ctx.tspec;
                LassoPathCache cache;
                for (size_t s = 0; s < specs.size(); ++s) {
                    const FittedModel fit = fit_model(specs[s], ctx, &cache);
                    run.forecasts[s].forecasts.row(i) = forecast_prices(fit, ctx).transpose();
                    if (accs[s]) accumulate_selection(fit, *accs[s]);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    int jobs = opts.jobs > 0 ? opts.jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    jobs = static_cast<int>(std::min<long>(jobs, n_days));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    for (auto& fm : run.forecasts) attach_realized(fm, series);
    for (size_t s = 0; s < specs.size(); ++s)
        if (accs[s]) run.selection.emplace(specs[s].id(), std::move(accs[s]->sc));

    run.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

ForecastMatrix combine(const ForecastMatrix& a, const ForecastMatrix& b, double wa, double wb) {
    if (a.forecasts.rows() != b.forecasts.rows() || a.dates != b.dates)
        throw DataError("combine: forecast matrices are not aligned");
    ForecastMatrix out;
    out.model_id = a.model_id + "+" + b.model_id;
    out.dates = a.dates;
    out.forecasts = wa * a.forecasts + wb * b.forecasts;
    out.realized = a.realized.size() ? a.realized : b.realized;
    return out;
}

}  // namespace epf

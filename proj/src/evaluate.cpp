#include "epf/evaluate.hpp"

#include <cmath>
#include <limits>

#include "epf/dates.hpp"
#include "epf/errors.hpp"

namespace epf {

namespace {

void check_aligned(const ForecastMatrix& fm) {
    if (fm.forecasts.size() == 0) throw DataError("empty forecast matrix");
    if (fm.realized.rows() != fm.forecasts.rows() || fm.realized.cols() != fm.forecasts.cols())
        throw DataError("forecast matrix '" + fm.model_id + "' has no aligned realized block");
}

Eigen::MatrixXd abs_errors(const ForecastMatrix& fm) {
    check_aligned(fm);
    return (fm.forecasts - fm.realized).cwiseAbs();
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double mae(const ForecastMatrix& fm) { return abs_errors(fm).mean(); }

double rmse(const ForecastMatrix& fm) {
    check_aligned(fm);
    return std::sqrt((fm.forecasts - fm.realized).array().square().mean());
}

Eigen::VectorXd mpdfb(const Eigen::MatrixXd& errs) {
    if (errs.size() == 0) throw DataError("mpdfb: empty error table");
    if ((errs.array() <= 0.0).any()) throw DataError("mpdfb: errors must be strictly positive");
    const Eigen::RowVectorXd best = errs.colwise().minCoeff();
    Eigen::VectorXd out(errs.rows());
    for (long i = 0; i < errs.rows(); ++i)
        out(i) = ((errs.row(i) - best).cwiseAbs().array() / best.array()).mean() * 100.0;
    return out;
}

DmResult dm_test(const Eigen::VectorXd& delta, int hac_lags) {
    const long n = delta.size();
    if (n < 30) throw DataError("dm_test: need at least 30 observations");
    const double mean = delta.mean();
    const Eigen::ArrayXd centered = delta.array() - mean;

    double var;
    if (hac_lags <= 0) {
        var = centered.square().sum() / static_cast<double>(n - 1);
    } else {
        // Newey-West with Bartlett weights
        var = centered.square().sum() / static_cast<double>(n);
        for (int l = 1; l <= hac_lags && l < n; ++l) {
            double g = 0.0;
            for (long t = l; t < n; ++t) g += centered(t) * centered(t - l);
            g /= static_cast<double>(n);
            var += 2.0 * (1.0 - static_cast<double>(l) / (hac_lags + 1)) * g;
        }
    }
    if (!(var > 0.0)) throw NumericError("dm_test: degenerate loss differential");

    DmResult r;
    r.stat = mean / std::sqrt(var / static_cast<double>(n));
    r.p_forward = normal_cdf(r.stat);
    r.p_reverse = 1.0 - r.p_forward;
    return r;
}

Eigen::VectorXd multivariate_loss_diff(const ForecastMatrix& x, const ForecastMatrix& y) {
    if (x.dates != y.dates) throw DataError("loss differential: matrices are not aligned");
    return abs_errors(x).rowwise().sum() - abs_errors(y).rowwise().sum();
}

DmResult dm_multivariate(const ForecastMatrix& x, const ForecastMatrix& y, int hac_lags) {
    return dm_test(multivariate_loss_diff(x, y), hac_lags);
}

HourlyDm dm_hourly(const ForecastMatrix& x, const ForecastMatrix& y, double alpha, int hac_lags) {
    if (x.dates != y.dates) throw DataError("dm_hourly: matrices are not aligned");
    const Eigen::MatrixXd ex = abs_errors(x), ey = abs_errors(y);
    HourlyDm out;
    for (int h = 0; h < 24; ++h) {
        const Eigen::VectorXd delta = ex.col(h) - ey.col(h);
        try {
            const DmResult r = dm_test(delta, hac_lags);
            out.stat[static_cast<size_t>(h)] = r.stat;
            out.p_forward[static_cast<size_t>(h)] = r.p_forward;
            out.p_reverse[static_cast<size_t>(h)] = r.p_reverse;
            if (r.p_forward < alpha) ++out.forward_significant;
            if (r.p_reverse < alpha) ++out.reverse_significant;
        } catch (const NumericError&) {
            // identical forecasts for this hour: not significant either way
            const double nan = std::numeric_limits<double>::quiet_NaN();
            out.stat[static_cast<size_t>(h)] = nan;
            out.p_forward[static_cast<size_t>(h)] = nan;
            out.p_reverse[static_cast<size_t>(h)] = nan;
        }
    }
    return out;
}

Season parse_season(const std::string& name) {
    if (name == "spring") return Season::Spring;
    if (name == "summer") return Season::Summer;
    if (name == "fall") return Season::Fall;
    if (name == "winter") return Season::Winter;
    throw DataError("unknown season '" + name + "' (spring, summer, fall, winter)");
}

ForecastMatrix filter_season(const ForecastMatrix& fm, Season season) {
    auto in_season = [season](unsigned m) {
        switch (season) {
            case Season::Spring: return m >= 3 && m <= 5;
            case Season::Summer: return m >= 6 && m <= 8;
            case Season::Fall: return m >= 9 && m <= 11;
            case Season::Winter: return m == 12 || m <= 2;
        }
        return false;
    };
    std::vector<long> rows;
    for (long d = 0; d < fm.days(); ++d)
        if (in_season(month_of(fm.dates[static_cast<size_t>(d)]))) rows.push_back(d);

    ForecastMatrix out;
    out.model_id = fm.model_id;
    out.forecasts.resize(static_cast<long>(rows.size()), 24);
    if (fm.realized.size()) out.realized.resize(static_cast<long>(rows.size()), 24);
    out.dates.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        out.dates.push_back(fm.dates[static_cast<size_t>(rows[i])]);
        out.forecasts.row(static_cast<long>(i)) = fm.forecasts.row(rows[i]);
        if (fm.realized.size()) out.realized.row(static_cast<long>(i)) = fm.realized.row(rows[i]);
    }
    return out;
}

OccurrenceTable occurrence_from_counts(const SelectionCounts& sc, const std::string& model_id) {
    if (sc.windows <= 0) throw DataError("occurrence: no windows recorded");
    OccurrenceTable t;
    t.model_id = model_id;
    t.params = sc.params;
    t.windows = sc.windows;
    t.pct.resize(sc.counts.rows(), sc.counts.cols());
    for (long i = 0; i < sc.counts.rows(); ++i)
        for (long j = 0; j < sc.counts.cols(); ++j)
            t.pct(i, j) = sc.exists(i, j)
                              ? 100.0 * sc.counts(i, j) / static_cast<double>(sc.windows)
                              : std::numeric_limits<double>::quiet_NaN();
    return t;
}

OccurrenceTable occurrence(const BacktestRun& run, const std::string& model_id) {
    auto it = run.selection.find(model_id);
    if (it == run.selection.end())
        throw DataError("occurrence: '" + model_id + "' is not a lasso model in this run");
    return occurrence_from_counts(it->second, model_id);
}

}  // namespace epf

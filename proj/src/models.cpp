#include "epf/models.hpp"

#include <cmath>

#include "epf/errors.hpp"

namespace epf {

namespace {

const std::array<int, 7> kAllDow = {1, 2, 3, 4, 5, 6, 7};
const std::array<int, 3> kWeekendDow = {1, 6, 7};  // Monday, Saturday, Sunday

// expert dummy set; the periodic interactions drop the j = 7 member in the
// full-weekday case because the group then sums to its base regressor
std::vector<int> expert_dummy_set(const ModelSpec& s) {
    if (s.dow_full) return {1, 2, 3, 4, 5, 6, 7};
    return {1, 6, 7};
}
std::vector<int> expert_periodic_set(const ModelSpec& s) {
    if (s.dow_full) return {1, 2, 3, 4, 5, 6};
    return {1, 6, 7};
}

struct Lasso24Layout {
    bool p = false, nl = false;
    int hour = 1;

    int n_nl() const { return nl ? 16 : 0; }
    int off_min() const { return 192; }
    int off_max() const { return 192 + 8; }
    int off_dow() const { return 192 + n_nl(); }
    int off_per_h() const { return off_dow() + 7; }
    int off_per_24() const { return off_per_h() + (p ? 7 : 0); }
    int cols() const { return off_per_24() + (p && hour != 24 ? 7 : 0); }
};

struct UniLayout {
    bool p = false, nl = false;

    static constexpr int off_lag = 168;
    int off_per1() const { return 364; }
    int off_per24() const { return 364 + 168; }
    int off_nl() const { return 364 + (p ? 336 : 0); }
    int cols() const { return off_nl() + (nl ? 2 : 0); }
};

Eigen::VectorXd daily_min(const Eigen::MatrixXd& Z) { return Z.rowwise().minCoeff(); }
Eigen::VectorXd daily_max(const Eigen::MatrixXd& Z) { return Z.rowwise().maxCoeff(); }

// regressors of the expert equation for response day d; returns the number
// of values written, which matches expert_column_names
int expert_row_into(const ModelSpec& spec, const Eigen::MatrixXd& Z, const Eigen::VectorXd& dmin,
                    const Eigen::VectorXd& dmax, long d, int h, int weekday0, double* out) {
    int c = 0;
    if (!spec.star) out[c++] = 1.0;
    out[c++] = Z(d - 1, h - 1);
    out[c++] = Z(d - 2, h - 1);
    out[c++] = Z(d - 7, h - 1);
    if (spec.nonlinear) {
        out[c++] = dmin(d - 1);
        out[c++] = dmax(d - 1);
    }
    if (h != 24) out[c++] = Z(d - 1, 23);
    const int wd = weekday_after(weekday0, d);
    for (int j : expert_dummy_set(spec)) out[c++] = wd == j ? 1.0 : 0.0;
    if (spec.periodic) {
        for (int j : expert_periodic_set(spec)) out[c++] = wd == j ? Z(d - 1, h - 1) : 0.0;
        if (h != 24)
            for (int j : expert_periodic_set(spec)) out[c++] = wd == j ? Z(d - 1, 23) : 0.0;
    }
    return c;
}

void lasso24_row_into(const Lasso24Layout& lay, const Eigen::MatrixXd& Y,
                      const Eigen::VectorXd& dmin, const Eigen::VectorXd& dmax, long d, int h,
                      int weekday0, double* out) {
    for (int k = 1; k <= 8; ++k)
        for (int l = 1; l <= 24; ++l) out[(k - 1) * 24 + (l - 1)] = Y(d - k, l - 1);
    if (lay.nl) {
        for (int k = 1; k <= 8; ++k) out[lay.off_min() + k - 1] = dmin(d - k);
        for (int k = 1; k <= 8; ++k) out[lay.off_max() + k - 1] = dmax(d - k);
    }
    const int wd = weekday_after(weekday0, d);
    for (int j = 1; j <= 7; ++j) out[lay.off_dow() + j - 1] = wd == j ? 1.0 : 0.0;
    if (lay.p) {
        for (int j = 1; j <= 7; ++j)
            out[lay.off_per_h() + j - 1] = wd == j ? Y(d - 1, h - 1) : 0.0;
        if (h != 24)
            for (int j = 1; j <= 7; ++j)
                out[lay.off_per_24() + j - 1] = wd == j ? Y(d - 1, 23) : 0.0;
    }
}

// expert designs on the HoD-demeaned block when the star flag is set
Eigen::MatrixXd star_block(const Eigen::MatrixXd& Y, const SeasonalMeans& means) {
    Eigen::MatrixXd Z = Y;
    for (int h = 0; h < 24; ++h) Z.col(h).array() -= means.hod[static_cast<size_t>(h)];
    return Z;
}

Eigen::VectorXd flatten_hourly(const Eigen::MatrixXd& Y) {
    Eigen::VectorXd f(Y.rows() * 24);
    for (long d = 0; d < Y.rows(); ++d)
        for (int h = 0; h < 24; ++h) f(d * 24 + h) = Y(d, h);
    return f;
}

LassoFit select_fit(const PathEntry& entry, InfoCrit ic, long n) {
    if (ic == InfoCrit::OLS) return gic_select(entry.path, 0.0, entry.sigma2_zero);
    // the trailing unpenalised entry belongs to the OLS variant only
    const size_t n_cand = entry.path.size() > 1 ? entry.path.size() - 1 : entry.path.size();
    const double kappa = gic_kappa(ic, n);
    size_t best = 0;
    double best_gic = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n_cand; ++i) {
        const double gic =
            entry.path[i].rss + kappa * entry.path[i].k_nonzero * entry.sigma2_nonzero;
        if (gic <= best_gic) {
            best_gic = gic;
            best = i;
        }
    }
    return entry.path[best];
}

template <typename Builder>
const PathEntry& cached_entry(LassoPathCache* cache, LassoPathCache& local,
                              const std::string& key, Builder&& build) {
    if (cache) return cache->get_or_fit(key, build);
    return local.get_or_fit(key, build);
}

}  // namespace

std::string ModelSpec::id() const {
    switch (family) {
        case Family::MeanHow:
            return "mean_HoW";
        case Family::Naive:
            return "naive";
        case Family::Expert: {
            std::string s = "expert";
            if (star) s += "_star";
            if (dow_full) s += "_DoW";
            if (periodic) s += "_p";
            if (nonlinear) s += "_nl";
            return s;
        }
        case Family::Ar24:
            return demeaner == Demeaner::HoW ? "24AR_HoW" : "24AR_HoD";
        case Family::Var:
            return demeaner == Demeaner::HoW ? "VAR_HoW" : "VAR_HoD";
        case Family::Lasso24: {
            std::string s = "24lasso_DoW";
            if (periodic) s += "_p";
            if (nonlinear) s += "_nl";
            return s + "_" + to_string(ic);
        }
        case Family::ArUni:
            switch (demeaner) {
                case Demeaner::HoW: return "AR_HoW";
                case Demeaner::HoD: return "AR_HoD";
                case Demeaner::DoW: return "AR_DoW";
                case Demeaner::Overall: return "AR";
            }
            break;
        case Family::LassoUni: {
            std::string s = "lasso_HoW";
            if (periodic) s += "_p";
            if (nonlinear) s += "_nl";
            return s + "_" + to_string(ic);
        }
    }
    throw DataError("model id: bad spec");
}

const std::vector<ModelSpec>& ModelSpec::registry() {
    static const std::vector<ModelSpec> all = [] {
        std::vector<ModelSpec> v;
        auto add = [&](ModelSpec s) { v.push_back(s); };

        add({Family::MeanHow});
        add({Family::Naive});

        const std::array<std::pair<bool, bool>, 4> pn = {
            {{true, true}, {false, true}, {true, false}, {false, false}}};
        for (bool star : {false, true})
            for (bool dow : {true, false})
                for (auto [p, nl] : pn) {
                    ModelSpec s;
                    s.family = Family::Expert;
                    s.star = star;
                    s.dow_full = dow;
                    s.periodic = p;
                    s.nonlinear = nl;
                    add(s);
                }

        for (Demeaner dm : {Demeaner::HoW, Demeaner::HoD}) {
            ModelSpec s;
            s.family = Family::Ar24;
            s.demeaner = dm;
            add(s);
        }
        for (Demeaner dm : {Demeaner::HoW, Demeaner::HoD}) {
            ModelSpec s;
            s.family = Family::Var;
            s.demeaner = dm;
            add(s);
        }

        const std::array<InfoCrit, 4> ics = {InfoCrit::AIC, InfoCrit::HQC, InfoCrit::BIC,
                                             InfoCrit::OLS};
        for (auto [p, nl] : pn)
            for (InfoCrit ic : ics) {
                ModelSpec s;
                s.family = Family::Lasso24;
                s.periodic = p;
                s.nonlinear = nl;
                s.ic = ic;
                add(s);
            }

        for (Demeaner dm : {Demeaner::HoW, Demeaner::Overall, Demeaner::DoW, Demeaner::HoD}) {
            ModelSpec s;
            s.family = Family::ArUni;
            s.demeaner = dm;
            add(s);
        }

        const std::array<std::pair<bool, bool>, 4> pn_uni = {
            {{true, true}, {true, false}, {false, true}, {false, false}}};
        for (auto [p, nl] : pn_uni)
            for (InfoCrit ic : ics) {
                ModelSpec s;
                s.family = Family::LassoUni;
                s.periodic = p;
                s.nonlinear = nl;
                s.ic = ic;
                add(s);
            }
        return v;
    }();
    return all;
}

ModelSpec ModelSpec::parse(const std::string& id) {
    static const std::unordered_map<std::string, size_t> index = [] {
        std::unordered_map<std::string, size_t> m;
        const auto& all = registry();
        for (size_t i = 0; i < all.size(); ++i) m.emplace(all[i].id(), i);
        return m;
    }();
    auto it = index.find(id);
    if (it == index.end()) throw DataError("unknown model id '" + id + "'");
    return registry()[it->second];
}

bool is_lasso(const ModelSpec& spec) {
    return spec.family == Family::Lasso24 || spec.family == Family::LassoUni;
}

double bucket_mean(const SeasonalMeans& means, Demeaner kind, int weekday, int h) {
    switch (kind) {
        case Demeaner::HoW: return means.how_at(weekday, h);
        case Demeaner::HoD: return means.hod_at(h);
        case Demeaner::DoW: return means.dow_at(weekday);
        case Demeaner::Overall: return means.overall;
    }
    return 0.0;
}

WindowContext make_context(const Eigen::Ref<const Eigen::MatrixXd>& raw_window, int weekday0) {
    WindowContext ctx;
    ctx.raw = raw_window;
    ctx.weekday0 = weekday0;
    ctx.tspec = fit_transform(ctx.raw);
    ctx.Y = apply(ctx.tspec, ctx.raw);
    ctx.means = fit_means(ctx.Y, weekday0);
    return ctx;
}

std::vector<std::string> expert_column_names(const ModelSpec& spec, int hour) {
    std::vector<std::string> n;
    if (!spec.star) n.push_back("const");
    n.push_back("lag1");
    n.push_back("lag2");
    n.push_back("lag7");
    if (spec.nonlinear) {
        n.push_back("prev_min");
        n.push_back("prev_max");
    }
    if (hour != 24) n.push_back("prev_h24");
    for (int j : expert_dummy_set(spec)) n.push_back("dow" + std::to_string(j));
    if (spec.periodic) {
        for (int j : expert_periodic_set(spec)) n.push_back("dow" + std::to_string(j) + "_x_lag1");
        if (hour != 24)
            for (int j : expert_periodic_set(spec))
                n.push_back("dow" + std::to_string(j) + "_x_prev_h24");
    }
    return n;
}

std::vector<std::string> lasso24_column_names(const ModelSpec& spec, int hour) {
    Lasso24Layout lay{spec.periodic, spec.nonlinear, hour};
    std::vector<std::string> n;
    n.reserve(static_cast<size_t>(lay.cols()));
    for (int k = 1; k <= 8; ++k)
        for (int l = 1; l <= 24; ++l)
            n.push_back("lag" + std::to_string(k) + "_h" + std::to_string(l));
    if (spec.nonlinear) {
        for (int k = 1; k <= 8; ++k) n.push_back("lag" + std::to_string(k) + "_min");
        for (int k = 1; k <= 8; ++k) n.push_back("lag" + std::to_string(k) + "_max");
    }
    for (int j = 1; j <= 7; ++j) n.push_back("dow" + std::to_string(j));
    if (spec.periodic) {
        for (int j = 1; j <= 7; ++j) n.push_back("dow" + std::to_string(j) + "_x_lag1_h");
        if (hour != 24)
            for (int j = 1; j <= 7; ++j) n.push_back("dow" + std::to_string(j) + "_x_lag1_h24");
    }
    return n;
}

std::vector<std::string> lasso_uni_column_names(const ModelSpec& spec) {
    std::vector<std::string> n;
    for (int k = 1; k <= 168; ++k) n.push_back("how" + std::to_string(k));
    for (int k = 1; k <= 196; ++k) n.push_back("lag" + std::to_string(k));
    if (spec.periodic) {
        for (int k = 1; k <= 168; ++k) n.push_back("how" + std::to_string(k) + "_x_lag1");
        for (int k = 1; k <= 168; ++k) n.push_back("how" + std::to_string(k) + "_x_lag24");
    }
    if (spec.nonlinear) {
        n.push_back("prev_min");
        n.push_back("prev_max");
    }
    return n;
}

Design build_design_expert(const ModelSpec& spec, const Eigen::MatrixXd& Y, int hour,
                           int weekday0, const SeasonalMeans& means) {
    const long L = Y.rows();
    if (L < 9) throw DataError("short window: expert design needs at least 9 days");
    const Eigen::MatrixXd Z = spec.star ? star_block(Y, means) : Y;
    const Eigen::VectorXd dmin = daily_min(Z), dmax = daily_max(Z);

    Design d;
    d.names = expert_column_names(spec, hour);
    const long p = static_cast<long>(d.names.size());
    const long rows = L - 7;
    d.X.resize(rows, p);
    d.y.resize(rows);
    Eigen::VectorXd buf(p);
    for (long day = 7; day < L; ++day) {
        const int got = expert_row_into(spec, Z, dmin, dmax, day, hour, weekday0, buf.data());
        if (got != p) throw NumericError("expert design: column mismatch");
        d.X.row(day - 7) = buf;
        d.y(day - 7) = Z(day, hour - 1);
    }
    return d;
}

Design build_design_lasso24(const ModelSpec& spec, const Eigen::MatrixXd& Y, int hour,
                            int weekday0) {
    const long L = Y.rows();
    if (L < 10) throw DataError("short window: multivariate lasso design needs at least 10 days");
    Lasso24Layout lay{spec.periodic, spec.nonlinear, hour};
    const Eigen::VectorXd dmin = daily_min(Y), dmax = daily_max(Y);

    Design d;
    d.names = lasso24_column_names(spec, hour);
    const long p = lay.cols();
    const long rows = L - 8;
    d.X.resize(rows, p);
    d.y.resize(rows);
    Eigen::VectorXd buf(p);
    for (long day = 8; day < L; ++day) {
        lasso24_row_into(lay, Y, dmin, dmax, day, hour, weekday0, buf.data());
        d.X.row(day - 8) = buf;
        d.y(day - 8) = Y(day, hour - 1);
    }
    return d;
}

Design build_design_lasso_uni(const ModelSpec& spec, const Eigen::MatrixXd& Y, int weekday0) {
    const long L = Y.rows();
    if (L < 10) throw DataError("short window: univariate lasso design needs at least 10 days");
    UniLayout lay{spec.periodic, spec.nonlinear};
    const Eigen::VectorXd F = flatten_hourly(Y);
    const Eigen::VectorXd dmin = daily_min(Y), dmax = daily_max(Y);

    const long T = F.size();
    const long rows = T - 196;
    const long p = lay.cols();

    Design d;
    d.names = lasso_uni_column_names(spec);
    d.X = Eigen::MatrixXd::Zero(rows, p);
    d.y.resize(rows);
    for (long t = 196; t < T; ++t) {
        const long r = t - 196;
        const long day = t / 24;
        const int h = static_cast<int>(t % 24) + 1;
        const int wd = weekday_after(weekday0, day);
        const int how = (wd - 1) * 24 + (h - 1);  // 0-based bucket
        d.X(r, how) = 1.0;
        for (int k = 1; k <= 196; ++k) d.X(r, UniLayout::off_lag + k - 1) = F(t - k);
        if (spec.periodic) {
            d.X(r, lay.off_per1() + how) = F(t - 1);
            d.X(r, lay.off_per24() + how) = F(t - 24);
        }
        if (spec.nonlinear) {
            d.X(r, lay.off_nl()) = dmin(day - 1);
            d.X(r, lay.off_nl() + 1) = dmax(day - 1);
        }
        d.y(r) = F(t);
    }
    return d;
}

PathEntry fit_path_entry(const Design& dsg) {
    PathEntry e;
    e.path = lasso_path(dsg, lambda_grid(dsg, 100, 1e-4, /*include_zero=*/true));
    const LassoFit& last_nonzero =
        e.path.size() >= 2 ? e.path[e.path.size() - 2] : e.path.back();
    e.sigma2_nonzero = residual_variance(dsg, last_nonzero.beta);
    e.sigma2_zero = residual_variance(dsg, e.path.back().beta);
    return e;
}

FittedModel fit_model(const ModelSpec& spec, const WindowContext& ctx, LassoPathCache* cache) {
    FittedModel m;
    m.spec = spec;
    m.tspec = ctx.tspec;
    m.means = ctx.means;
    m.weekday0 = ctx.weekday0;
    m.window_len = ctx.len();
    const long L = ctx.len();
    LassoPathCache local;

    switch (spec.family) {
        case Family::MeanHow:
            m.detail = MeanHowFit{};
            break;
        case Family::Naive:
            if (L < 7) throw DataError("naive benchmark needs at least 7 days of history");
            m.detail = NaiveFit{};
            break;
        case Family::Expert: {
            ExpertFit f;
            for (int h = 1; h <= 24; ++h)
                f.beta[static_cast<size_t>(h - 1)] =
                    ols(build_design_expert(spec, ctx.Y, h, ctx.weekday0, ctx.means)).beta;
            m.detail = std::move(f);
            break;
        }
        case Family::Ar24: {
            Ar24Fit f;
            Eigen::VectorXd z(L);
            for (int h = 1; h <= 24; ++h) {
                for (long d = 0; d < L; ++d)
                    z(d) = ctx.Y(d, h - 1) -
                           bucket_mean(ctx.means, spec.demeaner, weekday_after(ctx.weekday0, d), h);
                f.hours[static_cast<size_t>(h - 1)] = yule_walker(z, 8);
            }
            m.detail = std::move(f);
            break;
        }
        case Family::Var: {
            Eigen::MatrixXd z(L, 24);
            for (long d = 0; d < L; ++d) {
                const int wd = weekday_after(ctx.weekday0, d);
                for (int h = 1; h <= 24; ++h)
                    z(d, h - 1) = ctx.Y(d, h - 1) - bucket_mean(ctx.means, spec.demeaner, wd, h);
            }
            m.detail = VarPanelFit{mv_yule_walker(z, 8, spec.var_fixed_order)};
            break;
        }
        case Family::Lasso24: {
            Lasso24Fit f;
            const std::string base = std::string("24|") + (spec.periodic ? "p" : "-") +
                                     (spec.nonlinear ? "n" : "-") + "|h";
            for (int h = 1; h <= 24; ++h) {
                const auto& entry =
                    cached_entry(cache, local, base + std::to_string(h), [&] {
                        return fit_path_entry(build_design_lasso24(spec, ctx.Y, h, ctx.weekday0));
                    });
                f.hours[static_cast<size_t>(h - 1)] = select_fit(entry, spec.ic, L - 8);
            }
            m.detail = std::move(f);
            break;
        }
        case Family::ArUni: {
            const Eigen::VectorXd F = flatten_hourly(ctx.Y);
            Eigen::VectorXd z(F.size());
            for (long t = 0; t < F.size(); ++t) {
                const int wd = weekday_after(ctx.weekday0, t / 24);
                const int h = static_cast<int>(t % 24) + 1;
                z(t) = F(t) - bucket_mean(ctx.means, spec.demeaner, wd, h);
            }
            m.detail = ArUniFit{yule_walker(z, 196)};
            break;
        }
        case Family::LassoUni: {
            const std::string key = std::string("uni|") + (spec.periodic ? "p" : "-") +
                                    (spec.nonlinear ? "n" : "-");
            const auto& entry = cached_entry(cache, local, key, [&] {
                return fit_path_entry(build_design_lasso_uni(spec, ctx.Y, ctx.weekday0));
            });
            m.detail = LassoUniFit{select_fit(entry, spec.ic, L * 24 - 196)};
            break;
        }
    }
    return m;
}

Eigen::VectorXd forecast_prices(const FittedModel& m, const WindowContext& ctx) {
    const long L = ctx.len();
    if (L != m.window_len) throw DataError("forecast: window length differs from the fit");
    const int wdt = ctx.target_weekday();
    Eigen::VectorXd out(24);

    if (std::holds_alternative<MeanHowFit>(m.detail)) {
        for (int h = 1; h <= 24; ++h) out(h - 1) = m.tspec.invert(m.means.how_at(wdt, h));
        return out;
    }
    if (std::holds_alternative<NaiveFit>(m.detail)) {
        const bool similar_week = wdt == 1 || wdt == 6 || wdt == 7;
        return ctx.raw.row(similar_week ? L - 7 : L - 1).transpose();
    }
    if (const auto* f = std::get_if<ExpertFit>(&m.detail)) {
        const Eigen::MatrixXd Z = m.spec.star ? star_block(ctx.Y, m.means) : ctx.Y;
        const Eigen::VectorXd dmin = daily_min(Z), dmax = daily_max(Z);
        Eigen::VectorXd buf;
        for (int h = 1; h <= 24; ++h) {
            const auto& beta = f->beta[static_cast<size_t>(h - 1)];
            buf.resize(beta.size());
            expert_row_into(m.spec, Z, dmin, dmax, L, h, m.weekday0, buf.data());
            double yhat = buf.dot(beta);
            if (m.spec.star) yhat += m.means.hod_at(h);
            out(h - 1) = m.tspec.invert(yhat);
        }
        return out;
    }
    if (const auto* f = std::get_if<Ar24Fit>(&m.detail)) {
        for (int h = 1; h <= 24; ++h) {
            const ArFit& ar = f->hours[static_cast<size_t>(h - 1)];
            Eigen::VectorXd lags(ar.order);
            for (int k = 1; k <= ar.order; ++k)
                lags(ar.order - k) =
                    ctx.Y(L - k, h - 1) -
                    bucket_mean(m.means, m.spec.demeaner, weekday_after(m.weekday0, L - k), h);
            out(h - 1) =
                m.tspec.invert(ar_predict(ar, lags) + bucket_mean(m.means, m.spec.demeaner, wdt, h));
        }
        return out;
    }
    if (const auto* f = std::get_if<VarPanelFit>(&m.detail)) {
        const int p = f->var.order;
        Eigen::MatrixXd lags(p, 24);
        for (int k = 1; k <= p; ++k) {
            const int wd = weekday_after(m.weekday0, L - k);
            for (int h = 1; h <= 24; ++h)
                lags(p - k, h - 1) =
                    ctx.Y(L - k, h - 1) - bucket_mean(m.means, m.spec.demeaner, wd, h);
        }
        const Eigen::VectorXd zhat = var_predict(f->var, lags);
        for (int h = 1; h <= 24; ++h)
            out(h - 1) = m.tspec.invert(zhat(h - 1) + bucket_mean(m.means, m.spec.demeaner, wdt, h));
        return out;
    }
    if (const auto* f = std::get_if<Lasso24Fit>(&m.detail)) {
        const Eigen::VectorXd dmin = daily_min(ctx.Y), dmax = daily_max(ctx.Y);
        for (int h = 1; h <= 24; ++h) {
            Lasso24Layout lay{m.spec.periodic, m.spec.nonlinear, h};
            const auto& beta = f->hours[static_cast<size_t>(h - 1)].beta;
            Eigen::VectorXd buf(lay.cols());
            lasso24_row_into(lay, ctx.Y, dmin, dmax, L, h, m.weekday0, buf.data());
            out(h - 1) = m.tspec.invert(buf.dot(beta));
        }
        return out;
    }
    if (const auto* f = std::get_if<ArUniFit>(&m.detail)) {
        const ArFit& ar = f->fit;
        const long T = L * 24;
        // demeaned history tail long enough for the recursion across the day
        Eigen::VectorXd hist(ar.order + 24);
        for (int k = 1; k <= ar.order; ++k) {
            const long t = T - k;
            const int wd = weekday_after(m.weekday0, t / 24);
            const int hh = static_cast<int>(t % 24) + 1;
            hist(ar.order - k) = ctx.Y(t / 24, hh - 1) - bucket_mean(m.means, m.spec.demeaner, wd, hh);
        }
        for (int h = 1; h <= 24; ++h) {
            const double zhat = ar_predict(ar, hist.head(ar.order + h - 1));
            hist(ar.order + h - 1) = zhat;
            out(h - 1) = m.tspec.invert(zhat + bucket_mean(m.means, m.spec.demeaner, wdt, h));
        }
        return out;
    }
    const auto& f = std::get<LassoUniFit>(m.detail);
    UniLayout lay{m.spec.periodic, m.spec.nonlinear};
    const auto& beta = f.fit.beta;
    const Eigen::VectorXd F = flatten_hourly(ctx.Y);
    const long T = F.size();
    const double prev_min = ctx.Y.row(L - 1).minCoeff();
    const double prev_max = ctx.Y.row(L - 1).maxCoeff();
    // transformed values of the forecast day, filled as the recursion advances
    Eigen::VectorXd yday(24);
    auto value_at = [&](long t) { return t < T ? F(t) : yday(t - T); };
    for (int h = 1; h <= 24; ++h) {
        const long t = T + h - 1;
        const int how = (wdt - 1) * 24 + (h - 1);
        double acc = beta(how);
        for (int k = 1; k <= 196; ++k) acc += beta(UniLayout::off_lag + k - 1) * value_at(t - k);
        if (m.spec.periodic) {
            acc += beta(lay.off_per1() + how) * value_at(t - 1);
            acc += beta(lay.off_per24() + how) * value_at(t - 24);
        }
        if (m.spec.nonlinear) {
            acc += beta(lay.off_nl()) * prev_min;
            acc += beta(lay.off_nl() + 1) * prev_max;
        }
        yday(h - 1) = acc;
        out(h - 1) = m.tspec.invert(acc);
    }
    return out;
}

}  // namespace epf

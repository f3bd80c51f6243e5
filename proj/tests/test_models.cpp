#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "epf/errors.hpp"
#include "epf/models.hpp"

using epf::Family;
using epf::ModelSpec;
using epf::WindowContext;

namespace {

// weekly profile plus noise, in transformed units; identity transform so
// model behaviour can be checked without the asinh layer
WindowContext profile_context(long days, int weekday0, double noise_sd, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd y(days, 24);
    for (long d = 0; d < days; ++d) {
        const int wd = epf::weekday_after(weekday0, d);
        for (int h = 1; h <= 24; ++h) {
            const double profile = std::sin(2.0 * M_PI * h / 24.0) + 0.3 * wd;
            y(d, h - 1) = profile + noise_sd * normal(rng);
        }
    }
    WindowContext ctx;
    ctx.Y = y;
    ctx.raw = y;
    ctx.weekday0 = weekday0;
    ctx.tspec = epf::TransformSpec{0.0, 1.0};
    ctx.means = epf::fit_means(y, weekday0);
    return ctx;
}

int class_of(const ModelSpec& s) {
    switch (s.family) {
        case Family::MeanHow: return 0;
        case Family::Naive: return 1;
        case Family::Expert: return 2;
        case Family::Ar24: return 3;
        case Family::Var: return 4;
        case Family::Lasso24: return 5;
        case Family::ArUni: return 6;
        case Family::LassoUni: return 7;
    }
    return -1;
}

}  // namespace

TEST_CASE("registry holds exactly the 58 models") {
    const auto& all = ModelSpec::registry();
    CHECK(all.size() == 58);

    std::set<std::string> ids;
    std::array<int, 8> counts{};
    for (const auto& s : all) {
        ids.insert(s.id());
        counts[static_cast<size_t>(class_of(s))]++;
    }
    CHECK(ids.size() == 58);
    CHECK(counts == std::array<int, 8>{1, 1, 16, 2, 2, 16, 4, 16});

    for (const char* id : {"mean_HoW", "naive", "expert_DoW_nl", "expert_DoW_p_nl",
                           "expert_star_DoW_p_nl", "24AR_HoW", "VAR_HoW", "VAR_HoD",
                           "24lasso_DoW_p_nl_HQC", "24lasso_DoW_nl_HQC", "AR_HoW", "AR",
                           "lasso_HoW_p_HQC", "lasso_HoW_OLS"}) {
        CHECK(ids.count(id) == 1);
        CHECK(ModelSpec::parse(id).id() == id);
    }
    CHECK_THROWS_AS(ModelSpec::parse("lasso_HoW_p_XYZ"), epf::DataError);
}

TEST_CASE("multivariate lasso design enumeration") {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Random(40, 24);
    const ModelSpec full = ModelSpec::parse("24lasso_DoW_p_nl_HQC");
    CHECK(epf::build_design_lasso24(full, y, 5, 1).cols() == 229);
    CHECK(epf::build_design_lasso24(full, y, 24, 1).cols() == 222);
    CHECK(epf::build_design_lasso24(ModelSpec::parse("24lasso_DoW_nl_HQC"), y, 5, 1).cols() == 215);
    CHECK(epf::build_design_lasso24(ModelSpec::parse("24lasso_DoW_p_HQC"), y, 5, 1).cols() == 213);
    CHECK(epf::build_design_lasso24(ModelSpec::parse("24lasso_DoW_p_HQC"), y, 24, 1).cols() == 206);
    CHECK(epf::build_design_lasso24(ModelSpec::parse("24lasso_DoW_HQC"), y, 5, 1).cols() == 199);

    const epf::Design d = epf::build_design_lasso24(full, y, 5, 1);
    CHECK(d.rows() == 32);  // eight leading lag days
    CHECK(d.names.size() == 229);
    for (int h : {1, 12, 24})
        CHECK(epf::lasso24_column_names(full, h).size() ==
              static_cast<size_t>(epf::build_design_lasso24(full, y, h, 1).cols()));
}

TEST_CASE("univariate lasso design enumeration") {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Random(12, 24);
    CHECK(epf::build_design_lasso_uni(ModelSpec::parse("lasso_HoW_p_nl_HQC"), y, 1).cols() == 702);
    CHECK(epf::build_design_lasso_uni(ModelSpec::parse("lasso_HoW_p_HQC"), y, 1).cols() == 700);
    CHECK(epf::build_design_lasso_uni(ModelSpec::parse("lasso_HoW_nl_HQC"), y, 1).cols() == 366);
    CHECK(epf::build_design_lasso_uni(ModelSpec::parse("lasso_HoW_HQC"), y, 1).cols() == 364);

    // each row carries exactly one HoW indicator, so over the sample every
    // bucket gets floor(n/168) or ceil(n/168) ones
    const epf::Design d = epf::build_design_lasso_uni(ModelSpec::parse("lasso_HoW_HQC"), y, 3);
    const long n = d.rows();
    CHECK(n == 12 * 24 - 196);
    for (int k = 0; k < 168; ++k) {
        const double ones = d.X.col(k).sum();
        CHECK(ones >= std::floor(static_cast<double>(n) / 168.0));
        CHECK(ones <= std::ceil(static_cast<double>(n) / 168.0));
    }
}

TEST_CASE("expert design enumeration and collinearity handling") {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Random(60, 24);
    const epf::SeasonalMeans means = epf::fit_means(y, 1);

    // 14 raw columns at h=5; the estimator drops the redundant 7th dummy
    const ModelSpec nl = ModelSpec::parse("expert_DoW_nl");
    const epf::Design d5 = epf::build_design_expert(nl, y, 5, 1, means);
    CHECK(d5.cols() == 14);
    CHECK(d5.names.size() == 14);
    const epf::OlsFit f5 = epf::ols(d5);
    REQUIRE(f5.dropped.size() == 1);
    CHECK(d5.names[static_cast<size_t>(f5.dropped[0])] == "dow7");

    // the full periodic model: 26 raw columns, 25 effective; 19/18 at h=24
    const ModelSpec full = ModelSpec::parse("expert_DoW_p_nl");
    const epf::Design dfull = epf::build_design_expert(full, y, 5, 1, means);
    CHECK(dfull.cols() == 26);
    CHECK(epf::ols(dfull).dropped.size() == 1);
    const epf::Design dh24 = epf::build_design_expert(full, y, 24, 1, means);
    CHECK(dh24.cols() == 19);
    CHECK(epf::ols(dh24).dropped.size() == 1);

    // Mon/Sat/Sun variants keep all three dummies and periodic copies
    const ModelSpec small = ModelSpec::parse("expert_p_nl");
    const epf::Design ds = epf::build_design_expert(small, y, 5, 1, means);
    CHECK(ds.cols() == 1 + 3 + 2 + 1 + 3 + 3 + 3);
    CHECK(epf::ols(ds).dropped.empty());

    // star: no intercept column
    const ModelSpec star = ModelSpec::parse("expert_star_DoW_nl");
    CHECK(epf::build_design_expert(star, y, 5, 1, means).cols() == 13);

    for (const char* id : {"expert", "expert_p", "expert_nl", "expert_DoW_p",
                           "expert_star_p_nl", "expert_star_DoW_p_nl"}) {
        const ModelSpec s = ModelSpec::parse(id);
        for (int h : {1, 24})
            CHECK(epf::expert_column_names(s, h).size() ==
                  static_cast<size_t>(epf::build_design_expert(s, y, h, 1, means).cols()));
    }
}

TEST_CASE("mean_HoW forecasts the back-transformed weekly profile") {
    WindowContext ctx = profile_context(63, 1, 0.0, 1);
    ctx.tspec = epf::TransformSpec{10.0, 2.0};
    const epf::FittedModel m = epf::fit_model(ModelSpec::parse("mean_HoW"), ctx);
    const Eigen::VectorXd f = epf::forecast_prices(m, ctx);
    const int wd = ctx.target_weekday();
    for (int h = 1; h <= 24; ++h)
        CHECK(f(h - 1) == doctest::Approx(ctx.tspec.invert(ctx.means.how_at(wd, h))).epsilon(1e-12));
}

TEST_CASE("naive benchmark follows the similar-day rule on raw prices") {
    // weekday0 = 3 (Wednesday) and 21 days: the target day is Wednesday
    WindowContext ctx = profile_context(21, 3, 0.1, 2);
    ctx.raw = Eigen::MatrixXd::Random(21, 24) * 40.0;
    const epf::FittedModel m = epf::fit_model(ModelSpec::parse("naive"), ctx);
    CHECK(ctx.target_weekday() == 3);
    CHECK((epf::forecast_prices(m, ctx) - ctx.raw.row(20).transpose()).cwiseAbs().maxCoeff() == 0.0);

    // weekday0 = 2 and 20 days: the target day is a Monday, so the forecast
    // reaches one week back
    WindowContext mon = profile_context(20, 2, 0.1, 3);
    mon.raw = Eigen::MatrixXd::Random(20, 24) * 40.0;
    const epf::FittedModel m2 = epf::fit_model(ModelSpec::parse("naive"), mon);
    CHECK(mon.target_weekday() == 1);
    CHECK((epf::forecast_prices(m2, mon) - mon.raw.row(13).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("24AR_HoW tracks a weekly profile") {
    const double sd = 0.3;
    WindowContext ctx = profile_context(730, 1, sd, 4);
    const epf::FittedModel m = epf::fit_model(ModelSpec::parse("24AR_HoW"), ctx);
    const Eigen::VectorXd f = epf::forecast_prices(m, ctx);
    const int wd = ctx.target_weekday();
    double mae = 0.0;
    for (int h = 1; h <= 24; ++h) {
        const double profile = std::sin(2.0 * M_PI * h / 24.0) + 0.3 * wd;
        // back to transformed units before comparing against the profile
        mae += std::abs(ctx.tspec.apply(f(h - 1)) - profile);
    }
    mae /= 24.0;
    CHECK(mae < 3.0 * sd / std::sqrt(730.0));
}

TEST_CASE("univariate AR with no memory collapses to the seasonal mean") {
    WindowContext ctx = profile_context(30, 1, 0.2, 5);
    ctx.tspec = epf::TransformSpec{5.0, 3.0};
    epf::FittedModel m;
    m.spec = ModelSpec::parse("AR_HoW");
    m.tspec = ctx.tspec;
    m.means = ctx.means;
    m.weekday0 = ctx.weekday0;
    m.window_len = ctx.len();
    epf::ArFit ar;
    ar.order = 0;
    ar.intercept = 0.125;
    m.detail = epf::ArUniFit{ar};

    const Eigen::VectorXd f = epf::forecast_prices(m, ctx);
    const int wd = ctx.target_weekday();
    for (int h = 1; h <= 24; ++h)
        CHECK(f(h - 1) ==
              doctest::Approx(ctx.tspec.invert(ctx.means.how_at(wd, h) + 0.125)).epsilon(1e-12));
}

TEST_CASE("recursive forecasting with only a lag-24 term equals the direct scheme") {
    WindowContext ctx = profile_context(30, 1, 0.5, 6);
    epf::FittedModel m;
    m.spec = ModelSpec::parse("AR_HoD");
    m.tspec = ctx.tspec;
    m.means = ctx.means;
    m.weekday0 = ctx.weekday0;
    m.window_len = ctx.len();
    epf::ArFit ar;
    ar.order = 24;
    ar.phi = Eigen::VectorXd::Zero(24);
    ar.phi(23) = 0.6;
    ar.intercept = 0.05;
    m.detail = epf::ArUniFit{ar};

    const Eigen::VectorXd rec = epf::forecast_prices(m, ctx);
    // direct one-shot oracle: only realized values feed the lag-24 term
    const long L = ctx.len();
    for (int h = 1; h <= 24; ++h) {
        const double z_lag = ctx.Y(L - 1, h - 1) - epf::bucket_mean(ctx.means, epf::Demeaner::HoD,
                                                                    epf::weekday_after(ctx.weekday0, L - 1), h);
        const double zhat = 0.05 + 0.6 * (z_lag - 0.05);
        const double expect =
            ctx.tspec.invert(zhat + epf::bucket_mean(ctx.means, epf::Demeaner::HoD, ctx.target_weekday(), h));
        CHECK(rec(h - 1) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("VAR_HoD matrix recursion equals its 24-equation form") {
    std::mt19937 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    WindowContext ctx = profile_context(210, 2, 0.4, 8);

    for (int draw = 0; draw < 10; ++draw) {
        const int p = 1 + draw % 3;
        epf::VarFit var;
        var.order = p;
        var.intercept = Eigen::VectorXd::NullaryExpr(24, [&](long) { return 0.1 * normal(rng); });
        for (int k = 0; k < p; ++k)
            var.coeffs.push_back(Eigen::MatrixXd::NullaryExpr(
                24, 24, [&](long, long) { return 0.05 * normal(rng); }));
        var.sigma = Eigen::MatrixXd::Identity(24, 24);

        epf::FittedModel m;
        m.spec = ModelSpec::parse("VAR_HoD");
        m.tspec = ctx.tspec;
        m.means = ctx.means;
        m.weekday0 = ctx.weekday0;
        m.window_len = ctx.len();
        m.detail = epf::VarPanelFit{var};

        const Eigen::VectorXd matrix_form = epf::forecast_prices(m, ctx);

        // independent scalar oracle, one equation per hour
        const long L = ctx.len();
        for (int h = 1; h <= 24; ++h) {
            double acc = ctx.means.hod_at(h) + var.intercept(h - 1);
            for (int k = 1; k <= p; ++k)
                for (int j = 1; j <= 24; ++j)
                    acc += var.coeffs[static_cast<size_t>(k - 1)](h - 1, j - 1) *
                           (ctx.Y(L - k, j - 1) - ctx.means.hod_at(j) - var.intercept(j - 1));
            CHECK(std::abs(matrix_form(h - 1) - ctx.tspec.invert(acc)) < 1e-8);
        }
    }
}

TEST_CASE("expert star on HoD-mean-free data matches the intercept variant") {
    std::mt19937 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd y(70, 24);
    for (long d = 0; d < y.rows(); ++d)
        for (int h = 0; h < 24; ++h) y(d, h) = normal(rng);
    // remove the HoD profile exactly
    for (int h = 0; h < 24; ++h) y.col(h).array() -= y.col(h).mean();

    WindowContext ctx;
    ctx.Y = y;
    ctx.raw = y;
    ctx.weekday0 = 1;
    ctx.tspec = epf::TransformSpec{0.0, 1.0};
    ctx.means = epf::fit_means(y, 1);

    const epf::FittedModel plain = epf::fit_model(ModelSpec::parse("expert_DoW_nl"), ctx);
    const epf::FittedModel star = epf::fit_model(ModelSpec::parse("expert_star_DoW_nl"), ctx);
    const Eigen::VectorXd fp = epf::forecast_prices(plain, ctx);
    const Eigen::VectorXd fs = epf::forecast_prices(star, ctx);
    CHECK((fp - fs).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("unpenalised multivariate lasso equals OLS on the same design") {
    WindowContext ctx = profile_context(260, 1, 0.5, 10);
    const ModelSpec spec = ModelSpec::parse("24lasso_DoW_OLS");
    const epf::FittedModel m = epf::fit_model(spec, ctx);
    const auto& fit = std::get<epf::Lasso24Fit>(m.detail);
    for (int h : {1, 13, 24}) {
        const epf::Design d = epf::build_design_lasso24(spec, ctx.Y, h, ctx.weekday0);
        const epf::OlsFit ref = epf::ols(d);
        CHECK(fit.hours[static_cast<size_t>(h - 1)].lambda == 0.0);
        CHECK((fit.hours[static_cast<size_t>(h - 1)].beta - ref.beta).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("every family produces finite forecasts") {
    WindowContext ctx = profile_context(320, 5, 0.4, 11);
    for (const char* id : {"mean_HoW", "naive", "expert_DoW_p_nl", "expert_star_p", "24AR_HoD",
                           "VAR_HoW", "24lasso_DoW_HQC", "AR_DoW", "AR", "lasso_HoW_BIC"}) {
        epf::LassoPathCache cache;
        const epf::FittedModel m = epf::fit_model(ModelSpec::parse(id), ctx, &cache);
        const Eigen::VectorXd f = epf::forecast_prices(m, ctx);
        CHECK(f.size() == 24);
        CHECK(f.allFinite());
    }
}

TEST_CASE("short windows are rejected") {
    WindowContext small = profile_context(8, 1, 0.1, 12);
    CHECK_THROWS_AS(epf::fit_model(ModelSpec::parse("expert_DoW"), small), epf::DataError);
    CHECK_THROWS_AS(epf::fit_model(ModelSpec::parse("24lasso_DoW_HQC"), small), epf::DataError);
    // eight days leave no degrees of freedom for an order-8 autoregression
    CHECK_THROWS_AS(epf::fit_model(ModelSpec::parse("24AR_HoW"), small), epf::NumericError);
    WindowContext tiny = profile_context(9, 1, 0.1, 13);
    CHECK_THROWS_AS(epf::fit_model(ModelSpec::parse("VAR_HoW"), tiny), epf::NumericError);
}

TEST_CASE("make_context wires the transform and the means together") {
    std::mt19937 rng(14);
    std::uniform_real_distribution<double> price(10.0, 80.0);
    Eigen::MatrixXd raw(30, 24);
    for (long d = 0; d < raw.rows(); ++d)
        for (int h = 0; h < 24; ++h) raw(d, h) = price(rng);
    const WindowContext ctx = epf::make_context(raw, 4);
    const epf::TransformSpec direct = epf::fit_transform(raw);
    CHECK(ctx.tspec.shift == direct.shift);
    CHECK(ctx.tspec.scale == direct.scale);
    CHECK(ctx.Y(3, 7) == doctest::Approx(direct.apply(raw(3, 7))).epsilon(1e-14));
    CHECK(ctx.target_weekday() == epf::weekday_after(4, 30));
}

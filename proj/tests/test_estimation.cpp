#include <doctest.h>

#include <cmath>
#include <random>

#include "epf/errors.hpp"
#include "epf/estimation.hpp"

using epf::Design;
using epf::InfoCrit;

namespace {

Design random_design(std::mt19937& rng, long n, long p) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Design d;
    d.X.resize(n, p);
    d.y.resize(n);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < p; ++j) d.X(i, j) = normal(rng);
        d.y(i) = normal(rng);
    }
    return d;
}

Eigen::VectorXd simulate_ar(std::mt19937& rng, const Eigen::VectorXd& phi, long n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const long p = phi.size();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 200);
    for (long t = p; t < x.size(); ++t) {
        double v = normal(rng);
        for (long k = 0; k < p; ++k) v += phi(k) * x(t - 1 - k);
        x(t) = v;
    }
    return x.tail(n);
}

// independent Levinson-Durbin oracle used to cross-check both the selected
// order and the monotonicity of the prediction variances
struct LevinsonOracle {
    std::vector<Eigen::VectorXd> phis;  // phis[p] has length p
    std::vector<double> sigma2;         // prediction variance at order p
    int aic_order = 0;

    LevinsonOracle(const Eigen::VectorXd& series, int p_max) {
        const long n = series.size();
        const double mean = series.mean();
        Eigen::VectorXd z = series.array() - mean;
        Eigen::VectorXd gamma(p_max + 1);
        for (int k = 0; k <= p_max; ++k) {
            double acc = 0.0;
            for (long t = k; t < n; ++t) acc += z(t) * z(t - k);
            gamma(k) = acc / static_cast<double>(n);
        }
        phis.assign(static_cast<size_t>(p_max) + 1, Eigen::VectorXd());
        sigma2.assign(static_cast<size_t>(p_max) + 1, 0.0);
        sigma2[0] = gamma(0);
        double best = static_cast<double>(n) * std::log(sigma2[0]);
        for (int p = 1; p <= p_max; ++p) {
            const Eigen::VectorXd& prev = phis[static_cast<size_t>(p - 1)];
            double acc = gamma(p);
            for (int k = 1; k < p; ++k) acc -= prev(k - 1) * gamma(p - k);
            const double kap = acc / sigma2[static_cast<size_t>(p - 1)];
            Eigen::VectorXd cur(p);
            for (int k = 1; k < p; ++k) cur(k - 1) = prev(k - 1) - kap * prev(p - k - 1);
            cur(p - 1) = kap;
            phis[static_cast<size_t>(p)] = cur;
            sigma2[static_cast<size_t>(p)] = sigma2[static_cast<size_t>(p - 1)] * (1.0 - kap * kap);
            const double aic = static_cast<double>(n) * std::log(sigma2[static_cast<size_t>(p)]) + 2.0 * p;
            if (aic < best) {
                best = aic;
                aic_order = p;
            }
        }
    }
};

double soft(double z, double g) { return z > g ? z - g : (z < -g ? z + g : 0.0); }

// KKT residuals of a fit, evaluated in the scaled coordinates
double kkt_violation(const Design& d, const epf::LassoFit& fit) {
    Eigen::VectorXd norms = d.X.colwise().norm();
    double ynorm = d.y.norm();
    if (ynorm <= 0) ynorm = 1.0;
    Eigen::MatrixXd Xs = d.X;
    Eigen::VectorXd bs = fit.beta;
    for (long j = 0; j < d.cols(); ++j) {
        if (norms(j) > 0) {
            Xs.col(j) /= norms(j);
            bs(j) *= norms(j) / ynorm;
        }
    }
    const Eigen::VectorXd r = d.y / ynorm - Xs * bs;
    double worst = 0.0;
    for (long j = 0; j < d.cols(); ++j) {
        if (norms(j) <= 0) continue;
        const double g = 2.0 * Xs.col(j).dot(r);
        if (bs(j) != 0.0)
            worst = std::max(worst, std::abs(g - fit.lambda * (bs(j) > 0 ? 1.0 : -1.0)));
        else
            worst = std::max(worst, std::max(0.0, std::abs(g) - fit.lambda));
    }
    return worst;
}

}  // namespace

TEST_CASE("ols: identity design returns y") {
    Design d;
    d.X = Eigen::MatrixXd::Identity(5, 5);
    d.y.resize(5);
    d.y << 3, -1, 4, -1, 5;
    const epf::OlsFit fit = epf::ols(d);
    CHECK(fit.dropped.empty());
    CHECK((fit.beta - d.y).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ols: exact duplicate column is dropped, fit unchanged") {
    std::mt19937 rng(11);
    Design d = random_design(rng, 40, 3);
    Design dup = d;
    dup.X.conservativeResize(40, 4);
    dup.X.col(3) = d.X.col(1);
    dup.names = {"a", "b", "c", "b_copy"};

    const epf::OlsFit base = epf::ols(d);
    const epf::OlsFit fit = epf::ols(dup);
    REQUIRE(fit.dropped.size() == 1);
    CHECK(fit.dropped[0] == 3);
    CHECK(fit.beta(3) == 0.0);
    CHECK((dup.X * fit.beta - d.X * base.beta).norm() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("ols matches the normal-equations oracle") {
    std::mt19937 rng(21);
    for (int rep = 0; rep < 5; ++rep) {
        Design d = random_design(rng, 50, 5);
        const Eigen::VectorXd oracle =
            (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
        const epf::OlsFit fit = epf::ols(d);
        CHECK((fit.beta - oracle).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("yule_walker: white noise selects a trivial order") {
    int small_order = 0;
    for (unsigned seed = 0; seed < 20; ++seed) {
        std::mt19937 rng(1000 + seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd x(5000);
        for (long t = 0; t < x.size(); ++t) x(t) = normal(rng);
        const epf::ArFit fit = epf::yule_walker(x, 8);
        CHECK(fit.order <= 8);
        if (fit.order <= 1) ++small_order;
        for (int k = 0; k < fit.order; ++k) CHECK(std::abs(fit.phi(k)) < 0.1);
    }
    CHECK(small_order >= 16);
}

TEST_CASE("yule_walker recovers an AR(1)") {
    std::mt19937 rng(42);
    Eigen::VectorXd phi(1);
    phi << 0.5;
    const Eigen::VectorXd x = simulate_ar(rng, phi, 5000);
    const epf::ArFit fit = epf::yule_walker(x, 8);
    REQUIRE(fit.order >= 1);
    CHECK(fit.phi(0) > 0.45);
    CHECK(fit.phi(0) < 0.55);
}

TEST_CASE("yule_walker agrees with an independent Levinson-Durbin oracle") {
    std::mt19937 rng(77);
    Eigen::VectorXd phi(2);
    phi << 0.4, -0.2;
    const Eigen::VectorXd x = simulate_ar(rng, phi, 3000);

    const LevinsonOracle oracle(x, 8);
    for (size_t p = 1; p < oracle.sigma2.size(); ++p)
        CHECK(oracle.sigma2[p] <= oracle.sigma2[p - 1] + 1e-12);  // variances non-increasing

    const epf::ArFit fit = epf::yule_walker(x, 8);
    CHECK(fit.order == oracle.aic_order);
    const Eigen::VectorXd& ophi = oracle.phis[static_cast<size_t>(oracle.aic_order)];
    CHECK((fit.phi - ophi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.sigma2 == doctest::Approx(oracle.sigma2[static_cast<size_t>(oracle.aic_order)]).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(x.mean()).epsilon(1e-12));
}

TEST_CASE("yule_walker rejects short series") {
    CHECK_THROWS_AS(epf::yule_walker(Eigen::VectorXd::Ones(8), 8), epf::NumericError);
}

TEST_CASE("ar_predict collapses to the intercept at order zero") {
    epf::ArFit fit;
    fit.order = 0;
    fit.intercept = 1.5;
    CHECK(epf::ar_predict(fit, Eigen::VectorXd()) == doctest::Approx(1.5));
}

TEST_CASE("mv_yule_walker: iid panel has no memory") {
    std::mt19937 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd panel(600, 4);
    for (long i = 0; i < panel.rows(); ++i)
        for (long j = 0; j < panel.cols(); ++j) panel(i, j) = normal(rng);
    const epf::VarFit fit = epf::mv_yule_walker(panel, 4);
    double worst = 0.0;
    for (const auto& m : fit.coeffs) worst = std::max(worst, m.norm());
    CHECK((fit.order == 0 || worst < 0.3));
}

TEST_CASE("mv_yule_walker recovers a diagonal VAR(1)") {
    std::mt19937 rng(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    const long D = 2000, m = 4;
    Eigen::MatrixXd panel(D, m);
    panel.row(0).setZero();
    for (long t = 1; t < D; ++t)
        for (long j = 0; j < m; ++j) panel(t, j) = 0.5 * panel(t - 1, j) + normal(rng);
    const epf::VarFit fit = epf::mv_yule_walker(panel, 4);
    REQUIRE(fit.order >= 1);
    for (long j = 0; j < m; ++j) {
        CHECK(fit.coeffs[0](j, j) > 0.45);
        CHECK(fit.coeffs[0](j, j) < 0.55);
        for (long k = 0; k < m; ++k)
            if (k != j) CHECK(std::abs(fit.coeffs[0](j, k)) < 0.1);
    }
    CHECK((fit.sigma - fit.sigma.transpose()).norm() == doctest::Approx(0.0));
    CHECK(Eigen::LLT<Eigen::MatrixXd>(fit.sigma).info() == Eigen::Success);
}

TEST_CASE("mv_yule_walker on one dimension reduces to yule_walker") {
    std::mt19937 rng(8);
    Eigen::VectorXd phi(2);
    phi << 0.6, -0.1;
    const Eigen::VectorXd x = simulate_ar(rng, phi, 500);
    const epf::ArFit uni = epf::yule_walker(x, 5);
    const epf::VarFit multi = epf::mv_yule_walker(x, 5);
    REQUIRE(multi.order == uni.order);
    for (int k = 0; k < uni.order; ++k)
        CHECK(multi.coeffs[static_cast<size_t>(k)](0, 0) == doctest::Approx(uni.phi(k)).epsilon(1e-10));
    CHECK(multi.intercept(0) == doctest::Approx(uni.intercept).epsilon(1e-12));
}

TEST_CASE("mv_yule_walker needs 200 observations") {
    CHECK_THROWS_AS(epf::mv_yule_walker(Eigen::MatrixXd::Random(150, 4), 2), epf::NumericError);
}

TEST_CASE("diagonal VAR matches 24 independent AR fits") {
    std::mt19937 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    const long D = 900;
    Eigen::MatrixXd panel(D, 24);
    panel.row(0).setZero();
    for (long t = 1; t < D; ++t)
        for (long j = 0; j < 24; ++j) panel(t, j) = 0.5 * panel(t - 1, j) + normal(rng);

    const epf::VarFit var = epf::mv_yule_walker(panel, 2);
    REQUIRE(var.order >= 1);
    for (long j = 0; j < 24; ++j) {
        const epf::ArFit ar = epf::yule_walker(panel.col(j), 2);
        REQUIRE(ar.order >= 1);
        CHECK(std::abs(var.coeffs[0](j, j) - ar.phi(0)) < 0.05);
    }
}

TEST_CASE("lasso: unpenalised fit equals OLS") {
    std::mt19937 rng(31);
    Design d = random_design(rng, 100, 20);
    const auto path = epf::lasso_path(d, {1.0, 0.5, 0.0});
    const epf::OlsFit fit = epf::ols(d);
    CHECK((path.back().beta - fit.beta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(path.back().k_nonzero == 20);
}

TEST_CASE("lasso: penalties at or above lambda_max give the zero fit") {
    std::mt19937 rng(32);
    Design d = random_design(rng, 80, 10);
    const double lmax = epf::lambda_max(d);
    const auto path = epf::lasso_path(d, {2.0 * lmax, lmax});
    CHECK(path[0].k_nonzero == 0);
    CHECK(path[1].k_nonzero == 0);
    CHECK(path[0].rss == doctest::Approx(d.y.squaredNorm()));
}

TEST_CASE("lasso: orthonormal design has the closed-form solution") {
    std::mt19937 rng(33);
    Design d = random_design(rng, 60, 6);
    // orthonormalise the columns so the scaled design is exactly orthonormal
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(d.X);
    d.X = qr.householderQ() * Eigen::MatrixXd::Identity(60, 6);

    const double ynorm = d.y.norm();
    for (double lam : {0.3, 0.05}) {
        const auto path = epf::lasso_path(d, {lam});
        for (long j = 0; j < 6; ++j) {
            const double z = d.X.col(j).dot(d.y) / ynorm;
            const double expect = soft(z, lam / 2.0) * ynorm;
            CHECK(path[0].beta(j) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("lasso: KKT conditions hold along the path and RSS is monotone") {
    std::mt19937 rng(34);
    for (int rep = 0; rep < 3; ++rep) {
        Design d = random_design(rng, 120, 30);
        const auto grid = epf::lambda_grid(d, 40, 1e-3, true);
        const auto path = epf::lasso_path(d, grid);
        REQUIRE(path.size() == grid.size());
        for (size_t i = 0; i < path.size(); ++i) {
            CHECK(kkt_violation(d, path[i]) < 1e-5);
            if (i > 0) CHECK(path[i].rss <= path[i - 1].rss * (1.0 + 1e-8) + 1e-12);
        }
    }
}

TEST_CASE("lasso: all-zero columns carry zero coefficients") {
    std::mt19937 rng(35);
    Design d = random_design(rng, 50, 5);
    d.X.col(2).setZero();
    const auto path = epf::lasso_path(d, epf::lambda_grid(d, 20, 1e-2, true));
    for (const auto& fit : path) CHECK(fit.beta(2) == 0.0);
}

TEST_CASE("lasso grid validation") {
    std::mt19937 rng(36);
    Design d = random_design(rng, 30, 3);
    CHECK_THROWS_AS(epf::lasso_path(d, {}), epf::DataError);
    CHECK_THROWS_AS(epf::lasso_path(d, {1.0, 1.0}), epf::DataError);
    CHECK_THROWS_AS(epf::lasso_path(d, {0.5, 1.0}), epf::DataError);
}

TEST_CASE("gic: kappa values") {
    CHECK(epf::gic_kappa(InfoCrit::AIC, 1000) == doctest::Approx(2.0));
    CHECK(epf::gic_kappa(InfoCrit::BIC, 1000) == doctest::Approx(std::log(1000.0)));
    CHECK(epf::gic_kappa(InfoCrit::HQC, 1000) == doctest::Approx(2.0 * std::log(std::log(1000.0))));
    CHECK(epf::gic_kappa(InfoCrit::OLS, 1000) == 0.0);
}

TEST_CASE("gic: kappa 0 selects the unpenalised end of the path") {
    std::mt19937 rng(37);
    Design d = random_design(rng, 90, 12);
    const auto path = epf::lasso_path(d, epf::lambda_grid(d, 30, 1e-3, true));
    const epf::LassoFit& pick = epf::gic_select(path, 0.0, 1.0);
    CHECK(pick.lambda == 0.0);

    const std::vector<epf::LassoFit> single(path.begin(), path.begin() + 1);
    CHECK(epf::gic_select(single, 3.0, 1.0).lambda == single[0].lambda);
}

TEST_CASE("gic/BIC finds a planted sparse model") {
    int good = 0;
    for (unsigned seed = 0; seed < 10; ++seed) {
        std::mt19937 rng(500 + seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        const long n = 500, p = 50;
        Design d = random_design(rng, n, p);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < 5; ++j) beta(j) = 1.0;
        // five unit coefficients on iid N(0,1) columns give signal variance
        // 5; unit noise then yields a signal-to-noise ratio of 5
        d.y = d.X * beta;
        for (long i = 0; i < n; ++i) d.y(i) += normal(rng);

        const auto path = epf::lasso_path(d, epf::lambda_grid(d, 100, 1e-4, false));
        const double sigma2 = epf::residual_variance(d, path.back().beta);
        const epf::LassoFit& pick =
            epf::gic_select(path, epf::gic_kappa(InfoCrit::BIC, n), sigma2);

        bool support_ok = true;
        for (int j = 0; j < 5; ++j) support_ok = support_ok && pick.beta(j) != 0.0;
        if (support_ok && pick.k_nonzero <= 15) ++good;
    }
    CHECK(good >= 8);
}

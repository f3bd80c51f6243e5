#pragma once

#include <string>
#include <vector>
#include <Eigen/Dense>

namespace epf {

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;

    long rows() const { return X.rows(); }
    long cols() const { return X.cols(); }
};

struct OlsFit {
    Eigen::VectorXd beta;      // full length; exactly-collinear columns get 0
    std::vector<int> dropped;  // indices removed by the sequential drop rule
};

// Least squares with deterministic handling of exact collinearity: columns
// are scanned left to right and a column whose residual against the span of
// the kept ones falls below 1e-10 * ||X||_F is dropped.
OlsFit ols(const Design& d);

struct ArFit {
    int order = 0;
    Eigen::VectorXd phi;     // `order` coefficients
    double intercept = 0.0;  // sample mean of the series handed in
    double sigma2 = 0.0;     // innovation variance at the selected order
};

// Yule-Walker via the Levinson-Durbin recursion on a series that has
// already had its seasonal component removed; the order 0..p_max is chosen
// by minimising AIC(p) = n log(sigma2_p) + 2p.
ArFit yule_walker(const Eigen::VectorXd& series, int p_max);

// One-step-ahead prediction from the most recent `order` values, newest
// last: intercept + sum_k phi_k (lags[end+1-k] - intercept).
double ar_predict(const ArFit& fit, const Eigen::VectorXd& lags);

struct VarFit {
    int order = 0;
    std::vector<Eigen::MatrixXd> coeffs;  // `order` m x m matrices
    Eigen::VectorXd intercept;            // m, sample mean of the panel
    Eigen::MatrixXd sigma;                // m x m residual covariance
};

// Multivariate Yule-Walker on a demeaned D x m panel: solves the block-
// Toeplitz system of autocovariance matrices for each candidate order and
// picks it by minimising AIC(p) = D log det(Sigma_p) + 2 p m^2. Requires
// D >= 200. fixed_order skips the AIC search and returns the p_max fit.
VarFit mv_yule_walker(const Eigen::MatrixXd& panel, int p_max, bool fixed_order = false);

Eigen::VectorXd var_predict(const VarFit& fit, const Eigen::MatrixXd& lags);  // rows old..new

struct LassoFit {
    Eigen::VectorXd beta;  // original scale
    double lambda = 0.0;
    int k_nonzero = 0;
    double rss = 0.0;  // residual sum of squares, original scale
};

// 2 max_j |x~_j' y~| on the unit-column-norm scaled problem: the smallest
// penalty for which the all-zero vector is stationary.
double lambda_max(const Design& d);

// points log-spaced from lambda_max down to ratio * lambda_max; a final 0
// is appended when include_zero is set.
std::vector<double> lambda_grid(const Design& d, int points = 100, double ratio = 1e-4,
                                bool include_zero = false);

// Cyclic coordinate descent with soft thresholding on the column-scaled
// problem, warm-started along the descending grid. Coefficients come back
// in original units. A grid entry of exactly 0 is seeded from the least
// squares solution so the unpenalised fit is exact.
std::vector<LassoFit> lasso_path(const Design& d, const std::vector<double>& lambdas);

enum class InfoCrit { AIC, HQC, BIC, OLS };

double gic_kappa(InfoCrit ic, long n);
const char* to_string(InfoCrit ic);

// Sample variance (about the mean, n-1 divisor) of y - X beta.
double residual_variance(const Design& d, const Eigen::VectorXd& beta);

// The fit minimising RSS + kappa * k_nonzero * sigma2; ties go to the
// least-penalised candidate.
const LassoFit& gic_select(const std::vector<LassoFit>& path, double kappa, double sigma2);

}  // namespace epf

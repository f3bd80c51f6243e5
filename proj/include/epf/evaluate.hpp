#pragma once

#include <array>
#include <string>
#include <vector>

#include "epf/backtest.hpp"
#include "epf/series.hpp"

namespace epf {

double mae(const ForecastMatrix& fm);
double rmse(const ForecastMatrix& fm);

// errs(i, j): error of model i on dataset j, all strictly positive. Returns
// the mean percentage deviation from the columnwise best model.
Eigen::VectorXd mpdfb(const Eigen::MatrixXd& errs);

struct DmResult {
    double stat = 0.0;
    double p_forward = 0.0;  // small when X's errors are systematically smaller
    double p_reverse = 0.0;
};

// One-sided Diebold-Mariano test on a loss-differential series. The default
// variance is the plain sample variance, appropriate for one-day-ahead
// forecasts; hac_lags > 0 switches to a Newey-West estimate for
// sensitivity analysis.
DmResult dm_test(const Eigen::VectorXd& delta, int hac_lags = 0);

// Per-day L1 norms of the error vectors: ||e_X,d||_1 - ||e_Y,d||_1.
Eigen::VectorXd multivariate_loss_diff(const ForecastMatrix& x, const ForecastMatrix& y);
DmResult dm_multivariate(const ForecastMatrix& x, const ForecastMatrix& y, int hac_lags = 0);

struct HourlyDm {
    std::array<double, 24> stat{};
    std::array<double, 24> p_forward{};  // NaN where the differential is degenerate
    std::array<double, 24> p_reverse{};
    int forward_significant = 0;  // hours with p_forward < alpha
    int reverse_significant = 0;
};

// The standard per-hour DM tests; degenerate hours count as not significant.
HourlyDm dm_hourly(const ForecastMatrix& x, const ForecastMatrix& y, double alpha = 0.05,
                   int hac_lags = 0);

enum class Season { Spring, Summer, Fall, Winter };
Season parse_season(const std::string& name);

// Keeps the rows whose month falls in the season (Spring = Mar/Apr/May and
// so on); the four seasons partition the test days exactly.
ForecastMatrix filter_season(const ForecastMatrix& fm, Season season);

struct OccurrenceTable {
    std::string model_id;
    std::vector<std::string> params;
    Eigen::MatrixXd pct;  // params x 24 or params x 1; NaN where the design has no such column
    long windows = 0;
};

OccurrenceTable occurrence(const BacktestRun& run, const std::string& model_id);
OccurrenceTable occurrence_from_counts(const SelectionCounts& sc, const std::string& model_id);

double normal_cdf(double x);

}  // namespace epf

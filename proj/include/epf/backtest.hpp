#pragma once

#include <map>
#include <string>
#include <vector>

#include "epf/models.hpp"
#include "epf/series.hpp"

namespace epf {

struct BacktestOptions {
    int jobs = 0;  // worker threads; 0 means all hardware threads
};

// How often each design column was selected (nonzero coefficient) across
// the rolling windows; feeds the occurrence statistics.
struct SelectionCounts {
    std::vector<std::string> params;
    Eigen::MatrixXi counts;  // params x 24 (multivariate) or params x 1 (univariate)
    Eigen::MatrixXi exists;  // 1 where the design actually has the column
    long windows = 0;
};

struct BacktestRun {
    WindowPlan plan;
    std::vector<ModelSpec> specs;
    std::vector<ForecastMatrix> forecasts;        // aligned with specs
    std::map<std::string, SelectionCounts> selection;  // lasso models only
    std::vector<TransformSpec> transforms;        // one per forecast day, in day order
    double elapsed_seconds = 0.0;

    const ForecastMatrix& forecast_for(const std::string& model_id) const;
};

// Rolls the calibration window one day at a time: refits the transform, the
// seasonal means and every requested model, forecasts the next day and
// back-transforms. Work is spread across (day) tasks, each of which is a
// pure function of the window, so parallel and serial runs are identical.
BacktestRun run_backtest(const PriceSeries& series, const std::vector<ModelSpec>& specs,
                         const WindowPlan& plan, const BacktestOptions& opts = {});

// Cellwise weighted average of two aligned forecast matrices.
ForecastMatrix combine(const ForecastMatrix& a, const ForecastMatrix& b, double wa = 0.5,
                       double wb = 0.5);

}  // namespace epf

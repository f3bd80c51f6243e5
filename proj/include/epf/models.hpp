#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "epf/calendar.hpp"
#include "epf/dates.hpp"
#include "epf/estimation.hpp"
#include "epf/transform.hpp"

namespace epf {

// The eight model classes. Multivariate families produce all 24 hours at
// once from realized lags; univariate families forecast recursively,
// feeding predictions back in as lags.
enum class Family { MeanHow, Naive, Expert, Ar24, Var, Lasso24, ArUni, LassoUni };

// Which seasonal mean is removed before the autoregression.
enum class Demeaner { HoW, HoD, DoW, Overall };

struct ModelSpec {
    Family family = Family::MeanHow;
    bool dow_full = false;   // expert: dummies for all 7 weekdays vs Mon/Sat/Sun
    bool periodic = false;   // expert / lasso: weekday-interacted lag terms
    bool nonlinear = false;  // expert / lasso: previous-day min/max terms
    bool star = false;       // expert: HoD-demeaned response, no intercept
    Demeaner demeaner = Demeaner::HoW;
    InfoCrit ic = InfoCrit::HQC;

    // run-level toggle for the VAR family; not part of the id
    bool var_fixed_order = false;

    std::string id() const;
    static ModelSpec parse(const std::string& id);

    // All 58 models, in class order: 1 mean + 1 naive + 16 expert + 2 AR24
    // + 2 VAR + 16 multivariate lasso + 4 univariate AR + 16 univariate lasso.
    static const std::vector<ModelSpec>& registry();
};

bool is_lasso(const ModelSpec& spec);

// Everything a model needs from one calibration window.
struct WindowContext {
    Eigen::MatrixXd Y;    // asinh-transformed window, L x 24
    Eigen::MatrixXd raw;  // raw prices, L x 24 (the naive benchmark works on these)
    int weekday0 = 1;     // weekday of the first window row
    TransformSpec tspec;
    SeasonalMeans means;

    long len() const { return Y.rows(); }
    int target_weekday() const { return weekday_after(weekday0, len()); }
};

WindowContext make_context(const Eigen::Ref<const Eigen::MatrixXd>& raw_window, int weekday0);

// --- design construction ---------------------------------------------------
// Column labels are stable across windows and shared with the selection
// statistics; the count checks in the acceptance suite pin the exact
// enumeration.

Design build_design_expert(const ModelSpec& spec, const Eigen::MatrixXd& Y, int hour,
                           int weekday0, const SeasonalMeans& means);
Design build_design_lasso24(const ModelSpec& spec, const Eigen::MatrixXd& Y, int hour,
                            int weekday0);
Design build_design_lasso_uni(const ModelSpec& spec, const Eigen::MatrixXd& Y, int weekday0);

std::vector<std::string> expert_column_names(const ModelSpec& spec, int hour);
std::vector<std::string> lasso24_column_names(const ModelSpec& spec, int hour);
std::vector<std::string> lasso_uni_column_names(const ModelSpec& spec);

// --- fitted models ----------------------------------------------------------

struct MeanHowFit {};
struct NaiveFit {};
struct ExpertFit {
    std::array<Eigen::VectorXd, 24> beta;
};
struct Ar24Fit {
    std::array<ArFit, 24> hours;
};
struct VarPanelFit {
    VarFit var;
};
struct Lasso24Fit {
    std::array<LassoFit, 24> hours;
};
struct ArUniFit {
    ArFit fit;
};
struct LassoUniFit {
    LassoFit fit;
};

struct FittedModel {
    ModelSpec spec;
    TransformSpec tspec;
    SeasonalMeans means;
    int weekday0 = 1;
    long window_len = 0;
    std::variant<MeanHowFit, NaiveFit, ExpertFit, Ar24Fit, VarPanelFit, Lasso24Fit, ArUniFit,
                 LassoUniFit>
        detail;
};

// One lasso path serves the AIC/HQC/BIC/OLS variants of the same design, so
// fits within one window share results through this cache. Single-threaded:
// the backtest uses one cache per (day, worker) task.
struct PathEntry {
    std::vector<LassoFit> path;  // descending grid plus a final lambda = 0 entry
    double sigma2_nonzero = 0.0; // residual variance at the smallest nonzero lambda
    double sigma2_zero = 0.0;    // residual variance of the unpenalised fit
};

class LassoPathCache {
public:
    template <typename Fn>
    const PathEntry& get_or_fit(const std::string& key, Fn&& fit) {
        auto it = entries_.find(key);
        if (it == entries_.end()) it = entries_.emplace(key, fit()).first;
        return it->second;
    }

private:
    std::unordered_map<std::string, PathEntry> entries_;
};

PathEntry fit_path_entry(const Design& dsg);

FittedModel fit_model(const ModelSpec& spec, const WindowContext& ctx,
                      LassoPathCache* cache = nullptr);

// 24 price forecasts for the day following the window; transformed-scale
// models are inverted back through the window's TransformSpec.
Eigen::VectorXd forecast_prices(const FittedModel& model, const WindowContext& ctx);

double bucket_mean(const SeasonalMeans& means, Demeaner kind, int weekday, int h);

}  // namespace epf

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epf/backtest.hpp"
#include "epf/errors.hpp"
#include "epf/evaluate.hpp"

namespace py = pybind11;

namespace {

std::vector<std::string> date_strings(const std::vector<epf::DaySerial>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (auto d : dates) out.push_back(epf::format_date(d));
    return out;
}

epf::PriceSeries make_series(const std::string& start_date, const Eigen::MatrixXd& prices,
                             const std::string& market, int start_weekday) {
    if (prices.cols() != 24) throw epf::DataError("price matrix must have 24 columns");
    epf::PriceSeries s;
    s.start = epf::parse_date(start_date);
    s.start_weekday =
        start_weekday >= 1 && start_weekday <= 7 ? start_weekday : epf::weekday_of(s.start);
    s.prices = prices;
    s.market_id = market;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "day-ahead electricity price forecasting engine";

    py::register_exception<epf::DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<epf::NumericError>(m, "NumericError", PyExc_ArithmeticError);

    // transform
    py::class_<epf::TransformSpec>(m, "TransformSpec")
        .def(py::init<double, double>(), py::arg("shift"), py::arg("scale"))
        .def_readonly("shift", &epf::TransformSpec::shift)
        .def_readonly("scale", &epf::TransformSpec::scale)
        .def("apply", [](const epf::TransformSpec& t, double p) { return t.apply(p); })
        .def("apply", [](const epf::TransformSpec& t, const Eigen::MatrixXd& p) { return epf::apply(t, p); })
        .def("invert", [](const epf::TransformSpec& t, double y) { return t.invert(y); })
        .def("invert", [](const epf::TransformSpec& t, const Eigen::MatrixXd& y) { return epf::invert(t, y); })
        .def("__repr__", [](const epf::TransformSpec& t) {
            return "TransformSpec(shift=" + std::to_string(t.shift) +
                   ", scale=" + std::to_string(t.scale) + ")";
        });
    m.def("fit_transform", &epf::fit_transform, py::arg("calib"));
    m.attr("MAD_FACTOR") = 1.0 / epf::kZ075;

    // calendar
    py::class_<epf::SeasonalMeans>(m, "SeasonalMeans")
        .def_property_readonly("how", [](const epf::SeasonalMeans& s) {
            return std::vector<double>(s.how.begin(), s.how.end());
        })
        .def_property_readonly("hod", [](const epf::SeasonalMeans& s) {
            return std::vector<double>(s.hod.begin(), s.hod.end());
        })
        .def_property_readonly("dow", [](const epf::SeasonalMeans& s) {
            return std::vector<double>(s.dow.begin(), s.dow.end());
        })
        .def_readonly("overall", &epf::SeasonalMeans::overall);
    m.def("fit_means", &epf::fit_means, py::arg("Y"), py::arg("weekday0"));

    // estimation
    py::class_<epf::ArFit>(m, "ArFit")
        .def_readonly("order", &epf::ArFit::order)
        .def_readonly("phi", &epf::ArFit::phi)
        .def_readonly("intercept", &epf::ArFit::intercept)
        .def_readonly("sigma2", &epf::ArFit::sigma2);
    py::class_<epf::VarFit>(m, "VarFit")
        .def_readonly("order", &epf::VarFit::order)
        .def_readonly("coeffs", &epf::VarFit::coeffs)
        .def_readonly("intercept", &epf::VarFit::intercept)
        .def_readonly("sigma", &epf::VarFit::sigma);
    py::class_<epf::LassoFit>(m, "LassoFit")
        .def_readonly("beta", &epf::LassoFit::beta)
        .def_readonly("lambda_", &epf::LassoFit::lambda)
        .def_readonly("k_nonzero", &epf::LassoFit::k_nonzero)
        .def_readonly("rss", &epf::LassoFit::rss);

    m.def(
        "ols",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
            return epf::ols(epf::Design{X, y, {}}).beta;
        },
        py::arg("X"), py::arg("y"));
    m.def("yule_walker", &epf::yule_walker, py::arg("series"), py::arg("p_max"));
    m.def("mv_yule_walker", &epf::mv_yule_walker, py::arg("panel"), py::arg("p_max"),
          py::arg("fixed_order") = false);
    m.def(
        "lasso_path",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<double> lambdas,
           int grid_points) {
            epf::Design d{X, y, {}};
            if (lambdas.empty()) lambdas = epf::lambda_grid(d, grid_points, 1e-4, true);
            return epf::lasso_path(d, lambdas);
        },
        py::arg("X"), py::arg("y"), py::arg("lambdas") = std::vector<double>{},
        py::arg("grid_points") = 100);
    m.def(
        "lambda_max",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
            return epf::lambda_max(epf::Design{X, y, {}});
        },
        py::arg("X"), py::arg("y"));

    // models
    m.def("model_ids", [] {
        std::vector<std::string> ids;
        for (const auto& s : epf::ModelSpec::registry()) ids.push_back(s.id());
        return ids;
    });

    // series and forecasts
    py::class_<epf::PriceSeries>(m, "PriceSeries")
        .def(py::init(&make_series), py::arg("start_date"), py::arg("prices"),
             py::arg("market") = "data", py::arg("start_weekday") = 0)
        .def_property_readonly("start_date",
                               [](const epf::PriceSeries& s) { return epf::format_date(s.start); })
        .def_readonly("start_weekday", &epf::PriceSeries::start_weekday)
        .def_readonly("prices", &epf::PriceSeries::prices)
        .def_readonly("market_id", &epf::PriceSeries::market_id)
        .def_property_readonly("days", &epf::PriceSeries::days);
    m.def(
        "load_csv",
        [](const std::string& path, const std::string& format, int start_weekday) {
            return epf::load_csv(path,
                                 format == "wide" ? epf::CsvFormat::Wide : epf::CsvFormat::Long,
                                 start_weekday);
        },
        py::arg("path"), py::arg("format") = "long", py::arg("start_weekday") = 0);
    m.def(
        "ingest_csv",
        [](const std::string& path, const std::string& format, int start_weekday) {
            return epf::repair_clock_change(
                epf::load_csv_raw(path,
                                  format == "wide" ? epf::CsvFormat::Wide : epf::CsvFormat::Long),
                start_weekday);
        },
        py::arg("path"), py::arg("format") = "long", py::arg("start_weekday") = 0,
        "load a CSV and repair clock-change gaps and doubles");
    m.def("write_series_csv", &epf::write_series_csv, py::arg("series"), py::arg("path"));

    py::class_<epf::ForecastMatrix>(m, "ForecastMatrix")
        .def_readonly("model_id", &epf::ForecastMatrix::model_id)
        .def_property_readonly(
            "dates", [](const epf::ForecastMatrix& fm) { return date_strings(fm.dates); })
        .def_readonly("forecasts", &epf::ForecastMatrix::forecasts)
        .def_readonly("realized", &epf::ForecastMatrix::realized)
        .def_property_readonly("days", &epf::ForecastMatrix::days);

    // backtest
    py::class_<epf::BacktestRun>(m, "BacktestRun")
        .def_property_readonly("model_ids",
                               [](const epf::BacktestRun& r) {
                                   std::vector<std::string> ids;
                                   for (const auto& s : r.specs) ids.push_back(s.id());
                                   return ids;
                               })
        .def_readonly("forecasts", &epf::BacktestRun::forecasts)
        .def_readonly("elapsed_seconds", &epf::BacktestRun::elapsed_seconds)
        .def("forecast_for", &epf::BacktestRun::forecast_for, py::arg("model_id"),
             py::return_value_policy::reference_internal);
    m.def(
        "backtest",
        [](const epf::PriceSeries& series, const std::vector<std::string>& models, long calib_len,
           long first_day, long last_day, long stride, int jobs, bool var_fixed_order) {
            std::vector<epf::ModelSpec> specs;
            for (const auto& id : models) {
                epf::ModelSpec s = epf::ModelSpec::parse(id);
                s.var_fixed_order = var_fixed_order;
                specs.push_back(s);
            }
            epf::WindowPlan plan;
            plan.calib_len = calib_len;
            plan.first_forecast_day = first_day >= 0 ? first_day : calib_len;
            plan.last_forecast_day = last_day >= 0 ? last_day : series.days() - 1;
            plan.stride = stride;
            epf::BacktestOptions opts;
            opts.jobs = jobs;
            return epf::run_backtest(series, specs, plan, opts);
        },
        py::arg("series"), py::arg("models"), py::arg("calib_len") = 730,
        py::arg("first_day") = -1, py::arg("last_day") = -1, py::arg("stride") = 1,
        py::arg("jobs") = 0, py::arg("var_fixed_order") = false,
        py::call_guard<py::gil_scoped_release>());
    m.def("combine", &epf::combine, py::arg("a"), py::arg("b"), py::arg("wa") = 0.5,
          py::arg("wb") = 0.5);

    // evaluation
    m.def("mae", &epf::mae, py::arg("fm"));
    m.def("rmse", &epf::rmse, py::arg("fm"));
    m.def("mpdfb", &epf::mpdfb, py::arg("errs"));
    py::class_<epf::DmResult>(m, "DmResult")
        .def_readonly("stat", &epf::DmResult::stat)
        .def_readonly("p_forward", &epf::DmResult::p_forward)
        .def_readonly("p_reverse", &epf::DmResult::p_reverse);
    m.def("dm_test", &epf::dm_test, py::arg("delta"), py::arg("hac_lags") = 0);
    m.def("dm_multivariate", &epf::dm_multivariate, py::arg("x"), py::arg("y"),
          py::arg("hac_lags") = 0);
    py::class_<epf::HourlyDm>(m, "HourlyDm")
        .def_property_readonly("p_forward",
                               [](const epf::HourlyDm& r) {
                                   return std::vector<double>(r.p_forward.begin(), r.p_forward.end());
                               })
        .def_property_readonly("p_reverse",
                               [](const epf::HourlyDm& r) {
                                   return std::vector<double>(r.p_reverse.begin(), r.p_reverse.end());
                               })
        .def_readonly("forward_significant", &epf::HourlyDm::forward_significant)
        .def_readonly("reverse_significant", &epf::HourlyDm::reverse_significant);
    m.def("dm_hourly", &epf::dm_hourly, py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05,
          py::arg("hac_lags") = 0);
    m.def("attach_realized", &epf::attach_realized, py::arg("fm"), py::arg("series"));

    py::class_<epf::OccurrenceTable>(m, "OccurrenceTable")
        .def_readonly("model_id", &epf::OccurrenceTable::model_id)
        .def_readonly("params", &epf::OccurrenceTable::params)
        .def_readonly("pct", &epf::OccurrenceTable::pct)
        .def_readonly("windows", &epf::OccurrenceTable::windows);
    m.def("occurrence", &epf::occurrence, py::arg("run"), py::arg("model_id"));
}

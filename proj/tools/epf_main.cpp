// epf: day-ahead electricity price forecasting pipeline.
//
// Subcommands: ingest, backtest, evaluate, dm, selection. A flat key=value
// config file can preload any flag (--config); command-line flags win.
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "epf/backtest.hpp"
#include "epf/errors.hpp"
#include "epf/evaluate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "epf 0.1.0";

std::uint64_t fnv1a64(const std::string& data, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw epf::DataError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// relative inputs resolve against EPF_DATA_DIR when it is set
std::string resolve_input(const std::string& path) {
    const char* root = std::getenv("EPF_DATA_DIR");
    if (root && *root && !path.empty() && !fs::path(path).is_absolute() && !fs::exists(path)) {
        const fs::path joined = fs::path(root) / path;
        if (fs::exists(joined)) return joined.string();
    }
    return path;
}

epf::CsvFormat parse_format(const std::string& fmt) {
    if (fmt == "long") return epf::CsvFormat::Long;
    if (fmt == "wide") return epf::CsvFormat::Wide;
    throw epf::DataError("unknown format '" + fmt + "' (long, wide)");
}

std::vector<epf::ModelSpec> parse_models(const std::string& list, bool var_fixed_order) {
    std::vector<epf::ModelSpec> specs;
    if (list == "all") {
        specs = epf::ModelSpec::registry();
    } else {
        std::stringstream ss(list);
        std::string id;
        while (std::getline(ss, id, ',')) {
            if (!id.empty()) specs.push_back(epf::ModelSpec::parse(id));
        }
    }
    if (specs.empty()) throw epf::DataError("no models requested");
    for (auto& s : specs) s.var_fixed_order = var_fixed_order;
    return specs;
}

void write_occurrence_csv(const epf::OccurrenceTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw epf::DataError("cannot write '" + path + "'");
    out << "param";
    if (t.pct.cols() == 24)
        for (int h = 1; h <= 24; ++h) out << ",h" << h;
    else
        out << ",pct";
    out << "\n";
    char buf[32];
    for (long i = 0; i < t.pct.rows(); ++i) {
        out << t.params[static_cast<size_t>(i)];
        for (long j = 0; j < t.pct.cols(); ++j) {
            if (std::isnan(t.pct(i, j))) {
                out << ",";
            } else {
                std::snprintf(buf, sizeof buf, "%.2f", t.pct(i, j));
                out << ',' << buf;
            }
        }
        out << "\n";
    }
}

struct RunDir {
    fs::path dir;
    json manifest;

    explicit RunDir(const std::string& path) : dir(path) {
        const fs::path mf = dir / "manifest.json";
        if (!fs::exists(mf)) throw epf::DataError("no manifest.json in '" + path + "'");
        manifest = json::parse(read_bytes(mf.string()));
    }

    std::vector<std::string> models() const {
        return manifest.at("models").get<std::vector<std::string>>();
    }

    epf::ForecastMatrix load_model(const std::string& id) const {
        const fs::path p = dir / (id + ".csv");
        if (!fs::exists(p))
            throw epf::DataError("missing forecasts for '" + id + "' in '" + dir.string() + "'");
        return epf::read_forecast_csv(p.string(), id);
    }

    epf::PriceSeries load_series() const {
        const std::string input = manifest.at("input").get<std::string>();
        return epf::load_csv(resolve_input(input), parse_format(manifest.at("format")),
                             manifest.value("start_weekday", 0));
    }

    std::string label() const { return manifest.value("market", dir.filename().string()); }
};

// --- subcommands -------------------------------------------------------------

int cmd_ingest(const std::string& input, const std::string& format, int start_weekday,
               const std::string& market, const std::string& out) {
    const epf::RawSeries raw = epf::load_csv_raw(resolve_input(input), parse_format(format));
    epf::PriceSeries s = epf::repair_clock_change(raw, start_weekday);
    if (!market.empty()) s.market_id = market;
    epf::write_series_csv(s, out);
    std::cout << "ingested " << s.days() << " days (" << epf::format_date(s.start) << " .. "
              << epf::format_date(s.date_of(s.days() - 1)) << ") -> " << out << std::endl;
    return 0;
}

int cmd_backtest(const std::string& input, const std::string& format, int start_weekday,
                 const std::string& models, long calib, long first_day, long last_day,
                 long test_days, long stride, int jobs, bool var_fixed_order,
                 const std::string& out_dir) {
    const std::string path = resolve_input(input);
    const epf::PriceSeries series = epf::load_csv(path, parse_format(format), start_weekday);
    const std::vector<epf::ModelSpec> specs = parse_models(models, var_fixed_order);

    epf::WindowPlan plan;
    plan.calib_len = calib;
    plan.last_forecast_day = last_day >= 0 ? last_day : series.days() - 1;
    if (first_day >= 0)
        plan.first_forecast_day = first_day;
    else if (test_days > 0)
        plan.first_forecast_day = plan.last_forecast_day - test_days + 1;
    else
        plan.first_forecast_day = calib;
    plan.stride = stride;

    epf::BacktestOptions opts;
    opts.jobs = jobs;
    const epf::BacktestRun run = epf::run_backtest(series, specs, plan, opts);

    fs::create_directories(out_dir);
    std::uint64_t forecast_hash = 1469598103934665603ULL;
    std::vector<std::string> ids;
    for (const auto& fm : run.forecasts) {
        const fs::path p = fs::path(out_dir) / (fm.model_id + ".csv");
        epf::write_forecast_csv(fm, p.string());
        forecast_hash = fnv1a64(read_bytes(p.string()), forecast_hash);
        ids.push_back(fm.model_id);
    }
    for (const auto& [id, sc] : run.selection) {
        json sel;
        sel["model"] = id;
        sel["windows"] = sc.windows;
        sel["params"] = sc.params;
        sel["hours"] = sc.counts.cols();
        std::vector<std::vector<int>> counts, exists;
        for (long i = 0; i < sc.counts.rows(); ++i) {
            counts.emplace_back(sc.counts.row(i).begin(), sc.counts.row(i).end());
            exists.emplace_back(sc.exists.row(i).begin(), sc.exists.row(i).end());
        }
        sel["counts"] = counts;
        sel["exists"] = exists;
        std::ofstream out(fs::path(out_dir) / (id + "_selection.json"));
        out << sel.dump(1) << "\n";
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["input"] = path;
    manifest["format"] = format;
    manifest["market"] = series.market_id;
    manifest["start_weekday"] = series.start_weekday;
    manifest["models"] = ids;
    manifest["calib_len"] = plan.calib_len;
    manifest["first_forecast_day"] = plan.first_forecast_day;
    manifest["last_forecast_day"] = plan.last_forecast_day;
    manifest["stride"] = plan.stride;
    manifest["forecast_days"] = run.forecasts.front().days();
    manifest["elapsed_seconds"] = run.elapsed_seconds;
    manifest["input_hash"] = fnv1a64(read_bytes(path));
    // changes whenever any input byte, config value or the version changes
    std::ostringstream config_key;
    config_key << kVersion << '|' << format << '|' << series.start_weekday << '|' << models << '|'
               << plan.calib_len << '|' << plan.first_forecast_day << '|' << plan.last_forecast_day
               << '|' << plan.stride << '|' << var_fixed_order;
    manifest["run_hash"] = fnv1a64(config_key.str(), fnv1a64(read_bytes(path), forecast_hash));
    {
        std::ofstream out(fs::path(out_dir) / "manifest.json");
        out << manifest.dump(1) << "\n";
    }
    std::cout << "backtest: " << ids.size() << " model(s), " << run.forecasts.front().days()
              << " forecast day(s), " << run.elapsed_seconds << " s -> " << out_dir << std::endl;
    return 0;
}

int cmd_evaluate(const std::vector<std::string>& run_dirs, const std::string& models_arg,
                 const std::string& season, int hac_lags, const std::string& out_dir) {
    if (run_dirs.empty()) throw epf::DataError("need at least one --run directory");
    std::vector<RunDir> runs;
    for (const auto& r : run_dirs) runs.emplace_back(r);

    std::vector<std::string> models;
    if (models_arg == "all" || models_arg.empty()) {
        models = runs.front().models();
    } else {
        std::stringstream ss(models_arg);
        std::string id;
        while (std::getline(ss, id, ',')) models.push_back(id);
    }
    if (models.empty()) throw epf::DataError("no models to evaluate");

    fs::create_directories(out_dir);
    const bool filter = !season.empty();
    const epf::Season season_val = filter ? epf::parse_season(season) : epf::Season::Spring;

    Eigen::MatrixXd mae_table(static_cast<long>(models.size()), static_cast<long>(runs.size()));
    Eigen::MatrixXd rmse_table = mae_table;

    for (size_t j = 0; j < runs.size(); ++j) {
        const epf::PriceSeries series = runs[j].load_series();
        std::vector<epf::ForecastMatrix> fms;
        for (const auto& id : models) {
            epf::ForecastMatrix fm = runs[j].load_model(id);
            epf::attach_realized(fm, series);
            if (filter) fm = epf::filter_season(fm, season_val);
            if (fm.days() == 0) throw epf::DataError("season filter removed all days");
            fms.push_back(std::move(fm));
        }
        for (size_t i = 0; i < models.size(); ++i) {
            mae_table(static_cast<long>(i), static_cast<long>(j)) = epf::mae(fms[i]);
            rmse_table(static_cast<long>(i), static_cast<long>(j)) = epf::rmse(fms[i]);
        }

        // pairwise DM matrices for this dataset: cell (row X, col Y) is the
        // p-value for "X's forecasts are better than Y's"
        const std::string tag = runs[j].label();
        std::ofstream dm_out(fs::path(out_dir) / ("dm_pvalues_" + tag + ".csv"));
        std::ofstream dmh_out(fs::path(out_dir) / ("dm_hourly_counts_" + tag + ".csv"));
        dm_out << "model";
        dmh_out << "model";
        for (const auto& id : models) {
            dm_out << "," << id;
            dmh_out << "," << id;
        }
        dm_out << "\n";
        dmh_out << "\n";
        for (size_t x = 0; x < models.size(); ++x) {
            dm_out << models[x];
            dmh_out << models[x];
            for (size_t y = 0; y < models.size(); ++y) {
                if (x == y) {
                    dm_out << ",";
                    dmh_out << ",";
                    continue;
                }
                // blank cells where the test is undefined: identical
                // forecasts, or runs shorter than the 30-day minimum
                try {
                    const epf::DmResult r = epf::dm_multivariate(fms[x], fms[y], hac_lags);
                    dm_out << "," << r.p_forward;
                } catch (const epf::Error&) {
                    dm_out << ",";
                }
                try {
                    const epf::HourlyDm hr = epf::dm_hourly(fms[x], fms[y], 0.05, hac_lags);
                    dmh_out << "," << hr.forward_significant;
                } catch (const epf::Error&) {
                    dmh_out << ",";
                }
            }
            dm_out << "\n";
            dmh_out << "\n";
        }
    }

    const Eigen::VectorXd mae_dev = epf::mpdfb(mae_table);
    const Eigen::VectorXd rmse_dev = epf::mpdfb(rmse_table);

    for (const auto& [name, table, dev] :
         {std::tuple<std::string, const Eigen::MatrixXd&, const Eigen::VectorXd&>{
              "metrics_mae.csv", mae_table, mae_dev},
          {"metrics_rmse.csv", rmse_table, rmse_dev}}) {
        std::ofstream out(fs::path(out_dir) / name);
        out << "model";
        for (const auto& r : runs) out << "," << r.label();
        out << ",mpdfb_pct\n";
        for (size_t i = 0; i < models.size(); ++i) {
            out << models[i];
            for (long j = 0; j < table.cols(); ++j) out << "," << table(static_cast<long>(i), j);
            out << "," << dev(static_cast<long>(i)) << "\n";
        }
    }
    std::cout << "evaluated " << models.size() << " model(s) on " << runs.size()
              << " dataset(s) -> " << out_dir << std::endl;
    return 0;
}

int cmd_dm(const std::string& run_dir, const std::string& x_id, const std::string& y_id,
           bool hourly, int hac_lags) {
    const RunDir run(run_dir);
    const epf::PriceSeries series = run.load_series();
    epf::ForecastMatrix x = run.load_model(x_id), y = run.load_model(y_id);
    epf::attach_realized(x, series);
    epf::attach_realized(y, series);

    const epf::DmResult r = epf::dm_multivariate(x, y, hac_lags);
    std::cout << "multivariate DM " << x_id << " vs " << y_id << ": stat " << r.stat
              << ", p_forward " << r.p_forward << ", p_reverse " << r.p_reverse << std::endl;
    if (hourly) {
        const epf::HourlyDm hr = epf::dm_hourly(x, y, 0.05, hac_lags);
        for (int h = 1; h <= 24; ++h)
            std::cout << "  h" << h << ": p_forward " << hr.p_forward[static_cast<size_t>(h - 1)]
                      << ", p_reverse " << hr.p_reverse[static_cast<size_t>(h - 1)] << "\n";
        std::cout << "  significant at 5%: " << hr.forward_significant << " forward, "
                  << hr.reverse_significant << " reverse" << std::endl;
    }
    return 0;
}

int cmd_selection(const std::vector<std::string>& run_dirs, const std::string& models_arg,
                  const std::string& out_dir) {
    if (run_dirs.empty()) throw epf::DataError("need at least one --run directory");
    std::set<std::string> wanted;
    if (!models_arg.empty() && models_arg != "all") {
        std::stringstream ss(models_arg);
        std::string id;
        while (std::getline(ss, id, ',')) wanted.insert(id);
    }

    // merge counts across runs (datasets); percentages are over all windows
    std::map<std::string, epf::SelectionCounts> merged;
    for (const auto& dir : run_dirs) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            const std::string suffix = "_selection.json";
            if (name.size() <= suffix.size() ||
                name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
                continue;
            const json sel = json::parse(read_bytes(entry.path().string()));
            const std::string id = sel.at("model");
            if (!wanted.empty() && !wanted.count(id)) continue;

            epf::SelectionCounts sc;
            sc.params = sel.at("params").get<std::vector<std::string>>();
            sc.windows = sel.at("windows").get<long>();
            const auto counts = sel.at("counts").get<std::vector<std::vector<int>>>();
            const auto exists = sel.at("exists").get<std::vector<std::vector<int>>>();
            sc.counts.resize(static_cast<long>(counts.size()),
                             static_cast<long>(counts.front().size()));
            sc.exists.resize(sc.counts.rows(), sc.counts.cols());
            for (long i = 0; i < sc.counts.rows(); ++i)
                for (long j = 0; j < sc.counts.cols(); ++j) {
                    sc.counts(i, j) = counts[static_cast<size_t>(i)][static_cast<size_t>(j)];
                    sc.exists(i, j) = exists[static_cast<size_t>(i)][static_cast<size_t>(j)];
                }

            auto it = merged.find(id);
            if (it == merged.end()) {
                merged.emplace(id, std::move(sc));
            } else {
                if (it->second.params != sc.params)
                    throw epf::DataError("selection files for '" + id + "' disagree on parameters");
                it->second.counts += sc.counts;
                it->second.windows += sc.windows;
            }
        }
    }
    if (merged.empty()) throw epf::DataError("no selection statistics found (lasso models only)");

    fs::create_directories(out_dir);
    for (const auto& [id, sc] : merged) {
        const epf::OccurrenceTable t = epf::occurrence_from_counts(sc, id);
        write_occurrence_csv(t, (fs::path(out_dir) / ("occurrence_" + id + ".csv")).string());
    }
    std::cout << "selection statistics for " << merged.size() << " model(s) -> " << out_dir
              << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"day-ahead electricity price forecasting: ingest, backtest, evaluate"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    // every subcommand takes a flat key=value config file; flags win
    const auto add_config = [](CLI::App* sub) {
        sub->set_config("--config", "", "flat key=value config file; command-line flags win");
    };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load a price CSV, repair clock changes, "
                                                "write the canonical wide CSV");
    std::string in_input, in_format = "long", in_market, in_out = "prices.csv";
    int in_weekday = 0;
    ingest->add_option("--input", in_input, "price CSV (long: date,hour,price; wide: date,h1..h24)")
        ->required();
    ingest->add_option("--format", in_format, "long or wide")->check(CLI::IsMember({"long", "wide"}));
    ingest->add_option("--start-weekday", in_weekday,
                       "weekday of the first day, 1=Monday..7=Sunday; 0 derives it from the date");
    ingest->add_option("--market", in_market, "market label stored with the series");
    ingest->add_option("--out", in_out, "output CSV path");

    // backtest
    auto* backtest = app.add_subcommand("backtest", "rolling-window forecasts for the chosen models");
    std::string bt_input, bt_format = "wide", bt_models = "all", bt_out = "run";
    long bt_calib = 730, bt_first = -1, bt_last = -1, bt_test_days = -1, bt_stride = 1;
    int bt_jobs = 0, bt_weekday = 0;
    bool bt_var_fixed = false;
    backtest->add_option("--input", bt_input, "ingested price CSV")->required();
    backtest->add_option("--format", bt_format, "long or wide")->check(CLI::IsMember({"long", "wide"}));
    backtest->add_option("--start-weekday", bt_weekday, "weekday override for day 0 (0 = derive)");
    backtest->add_option("--models", bt_models, "comma-separated model ids, or 'all'");
    backtest->add_option("--calib", bt_calib, "calibration window length in days");
    backtest->add_option("--first-day", bt_first, "first forecast day index (default: calib)");
    backtest->add_option("--last-day", bt_last, "last forecast day index (default: end of data)");
    backtest->add_option("--test-days", bt_test_days,
                         "forecast exactly this many trailing days (alternative to --first-day)");
    backtest->add_option("--stride", bt_stride, "forecast every k-th day (smoke runs only)");
    backtest->add_option("--jobs", bt_jobs, "worker threads (0 = all cores)");
    backtest->add_flag("--var-fixed-order", bt_var_fixed, "fix the VAR order at 8 instead of AIC");
    backtest->add_option("--out", bt_out, "output directory")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "metrics, m.p.d.f.b. and DM matrices for runs");
    std::vector<std::string> ev_runs;
    std::string ev_models = "all", ev_season, ev_out = "eval";
    int ev_hac = 0;
    evaluate->add_option("--run", ev_runs, "backtest output directory (repeat for several datasets)")
        ->required();
    evaluate->add_option("--models", ev_models, "model ids to evaluate, or 'all'");
    evaluate->add_option("--season", ev_season, "spring, summer, fall or winter")
        ->check(CLI::IsMember({"spring", "summer", "fall", "winter"}));
    evaluate->add_option("--dm-hac-lags", ev_hac, "Newey-West lags for the DM variance (default 0)");
    evaluate->add_option("--out", ev_out, "output directory");

    // dm
    auto* dm = app.add_subcommand("dm", "Diebold-Mariano test for one model pair");
    std::string dm_run, dm_x, dm_y;
    bool dm_hourly = false;
    int dm_hac = 0;
    dm->add_option("--run", dm_run, "backtest output directory")->required();
    dm->add_option("--x", dm_x, "candidate model id")->required();
    dm->add_option("--y", dm_y, "reference model id")->required();
    dm->add_flag("--hourly", dm_hourly, "also run the 24 per-hour tests");
    dm->add_option("--dm-hac-lags", dm_hac, "Newey-West lags for the DM variance");

    // selection
    auto* selection = app.add_subcommand("selection", "lasso variable-occurrence tables");
    std::vector<std::string> sel_runs;
    std::string sel_models = "all", sel_out = "selection";
    selection->add_option("--run", sel_runs, "backtest output directory (repeat to aggregate)")
        ->required();
    selection->add_option("--models", sel_models, "model ids, or 'all'");
    selection->add_option("--out", sel_out, "output directory");

    for (CLI::App* sub : {ingest, backtest, evaluate, dm, selection}) add_config(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(in_input, in_format, in_weekday, in_market, in_out);
        if (*backtest)
            return cmd_backtest(bt_input, bt_format, bt_weekday, bt_models, bt_calib, bt_first,
                                bt_last, bt_test_days, bt_stride, bt_jobs, bt_var_fixed, bt_out);
        if (*evaluate) return cmd_evaluate(ev_runs, ev_models, ev_season, ev_hac, ev_out);
        if (*dm) return cmd_dm(dm_run, dm_x, dm_y, dm_hourly, dm_hac);
        if (*selection) return cmd_selection(sel_runs, sel_models, sel_out);
    } catch (const epf::DataError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return 2;
    } catch (const epf::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}

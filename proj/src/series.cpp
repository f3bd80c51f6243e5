#include "epf/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "epf/errors.hpp"

namespace epf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim spaces and a possible trailing CR
        size_t b = field.find_first_not_of(" \t\r");
        size_t e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_price(const std::string& s, long lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v))
            throw DataError("non-finite value on line " + std::to_string(lineno));
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError("malformed row: bad number '" + s + "' on line " + std::to_string(lineno));
    }
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// shortest decimal representation that round-trips
std::string to_shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

using DayMap = std::map<DaySerial, std::array<std::vector<double>, 24>>;

RawSeries finish_raw(DayMap&& days, std::string market) {
    if (days.empty()) throw DataError("empty input: no price rows found");
    RawSeries raw;
    raw.start = days.begin()->first;
    raw.market_id = std::move(market);
    const DaySerial last = days.rbegin()->first;
    raw.obs.resize(static_cast<size_t>(last - raw.start + 1));
    for (DaySerial d = raw.start; d <= last; ++d) {
        auto it = days.find(d);
        if (it == days.end())
            throw DataError("missing day: no rows for " + format_date(d));
        raw.obs[static_cast<size_t>(d - raw.start)] = std::move(it->second);
    }
    return raw;
}

}  // namespace

RawSeries load_csv_raw(const std::string& path, CsvFormat fmt) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    const std::string market = std::filesystem::path(path).stem().string();

    DayMap days;
    std::string line;
    long lineno = 0;

    if (fmt == CsvFormat::Long) {
        bool first = true;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto f = split_csv_line(line);
            if (first) {
                first = false;
                // header row is optional in long format
                if (!f.empty() && lower(f[0]).find("date") != std::string::npos) continue;
            }
            if (f.size() != 3)
                throw DataError("malformed row: expected date,hour,price on line " + std::to_string(lineno));
            const DaySerial d = parse_date(f[0]);
            int hour = 0;
            try {
                hour = std::stoi(f[1]);
            } catch (const std::exception&) {
                throw DataError("malformed row: bad hour '" + f[1] + "' on line " + std::to_string(lineno));
            }
            if (hour < 1 || hour > 24)
                throw DataError("malformed row: hour " + std::to_string(hour) + " outside 1..24 on line " +
                                std::to_string(lineno));
            days[d][static_cast<size_t>(hour - 1)].push_back(parse_price(f[2], lineno));
        }
    } else {
        if (!std::getline(in, line)) throw DataError("empty input: '" + path + "'");
        ++lineno;
        auto header = split_csv_line(line);
        if (header.size() != 25 || lower(header[0]) != "date")
            throw DataError("wide format needs header date,h1,...,h24");
        for (int h = 1; h <= 24; ++h) {
            const std::string want = "h" + std::to_string(h);
            if (lower(header[static_cast<size_t>(h)]) != want)
                throw DataError("wide format header: expected '" + want + "' in column " + std::to_string(h + 1));
        }
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto f = split_csv_line(line);
            if (f.size() != 25)
                throw DataError("malformed row: expected 25 fields on line " + std::to_string(lineno));
            const DaySerial d = parse_date(f[0]);
            auto& slots = days[d];
            for (int h = 1; h <= 24; ++h) {
                if (f[static_cast<size_t>(h)].empty()) continue;  // a gap to be repaired
                slots[static_cast<size_t>(h - 1)].push_back(parse_price(f[static_cast<size_t>(h)], lineno));
            }
        }
    }
    return finish_raw(std::move(days), market);
}

PriceSeries load_csv(const std::string& path, CsvFormat fmt, int start_weekday) {
    RawSeries raw = load_csv_raw(path, fmt);
    for (size_t d = 0; d < raw.obs.size(); ++d) {
        for (int h = 0; h < 24; ++h) {
            const size_t n = raw.obs[d][static_cast<size_t>(h)].size();
            if (n == 0)
                throw DataError("missing hour " + std::to_string(h + 1) + " on " +
                                format_date(raw.start + static_cast<DaySerial>(d)));
            if (n > 1)
                throw DataError("duplicate hour " + std::to_string(h + 1) + " on " +
                                format_date(raw.start + static_cast<DaySerial>(d)) +
                                " (run the clock-change repair to accept DST duplicates)");
        }
    }
    return repair_clock_change(raw, start_weekday);
}

PriceSeries repair_clock_change(const RawSeries& raw, int start_weekday) {
    const long days = static_cast<long>(raw.obs.size());
    if (days == 0) throw DataError("empty series");

    // Flatten to an hourly sequence of optional values, averaging doubles.
    std::vector<double> flat(static_cast<size_t>(days) * 24, 0.0);
    std::vector<char> have(static_cast<size_t>(days) * 24, 0);
    for (long d = 0; d < days; ++d) {
        int missing = 0, doubled = 0;
        for (int h = 0; h < 24; ++h) {
            const auto& v = raw.obs[static_cast<size_t>(d)][static_cast<size_t>(h)];
            const size_t t = static_cast<size_t>(d) * 24 + static_cast<size_t>(h);
            if (v.empty()) {
                ++missing;
            } else if (v.size() == 1) {
                flat[t] = v[0];
                have[t] = 1;
            } else if (v.size() == 2) {
                ++doubled;
                flat[t] = 0.5 * (v[0] + v[1]);
                have[t] = 1;
            } else {
                throw DataError("unrepairable day " + format_date(raw.start + d) + ": hour " +
                                std::to_string(h + 1) + " observed " + std::to_string(v.size()) + " times");
            }
        }
        if (missing > 1 || doubled > 1)
            throw DataError("unrepairable day " + format_date(raw.start + d) + ": " +
                            std::to_string(missing) + " missing and " + std::to_string(doubled) +
                            " doubled hours");
    }
    for (size_t t = 0; t < flat.size(); ++t) {
        if (have[t]) continue;
        if (t == 0 || t + 1 == flat.size() || !have[t - 1] || !have[t + 1])
            throw DataError("unrepairable day " + format_date(raw.start + static_cast<long>(t / 24)) +
                            ": missing hour has no two observed neighbours");
        flat[t] = 0.5 * (flat[t - 1] + flat[t + 1]);
    }

    PriceSeries s;
    s.start = raw.start;
    s.start_weekday = start_weekday >= 1 && start_weekday <= 7 ? start_weekday : weekday_of(raw.start);
    s.market_id = raw.market_id;
    s.prices.resize(days, 24);
    for (long d = 0; d < days; ++d)
        for (int h = 0; h < 24; ++h)
            s.prices(d, h) = flat[static_cast<size_t>(d) * 24 + static_cast<size_t>(h)];
    if (!s.prices.allFinite()) throw DataError("non-finite value after ingestion");
    return s;
}

void write_series_csv(const PriceSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "date";
    for (int h = 1; h <= 24; ++h) out << ",h" << h;
    out << "\n";
    for (long d = 0; d < s.days(); ++d) {
        out << format_date(s.date_of(d));
        for (int h = 0; h < 24; ++h) out << ',' << to_shortest(s.prices(d, h));
        out << "\n";
    }
}

void WindowPlan::validate() const {
    if (calib_len < 2) throw DataError("window plan: calib_len must be >= 2");
    if (first_forecast_day < calib_len)
        throw DataError("window plan: first forecast day before end of first calibration window");
    if (last_forecast_day < first_forecast_day)
        throw DataError("window plan: empty forecast range");
    if (stride < 1) throw DataError("window plan: stride must be >= 1");
}

std::vector<long> WindowPlan::forecast_days() const {
    validate();
    std::vector<long> days;
    for (long t = first_forecast_day; t <= last_forecast_day; t += stride) days.push_back(t);
    return days;
}

CalibWindow window(const PriceSeries& s, const WindowPlan& plan, long t) {
    plan.validate();
    if (t < plan.first_forecast_day || t > plan.last_forecast_day)
        throw DataError("window: day " + std::to_string(t) + " outside the forecast range");
    if (t >= s.days())
        throw DataError("window: day " + std::to_string(t) + " beyond the series");
    const long first = t - plan.calib_len;
    return CalibWindow{s.prices.middleRows(first, plan.calib_len), s.date_of(t), first,
                       s.weekday_of_day(first)};
}

void write_forecast_csv(const ForecastMatrix& fm, const std::string& path) {
    if (fm.days() != static_cast<long>(fm.dates.size()))
        throw DataError("forecast matrix: dates and rows disagree");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "date";
    for (int h = 1; h <= 24; ++h) out << ",h" << h;
    out << "\n";
    char buf[32];
    for (long d = 0; d < fm.days(); ++d) {
        out << format_date(fm.dates[static_cast<size_t>(d)]);
        for (int h = 0; h < 24; ++h) {
            std::snprintf(buf, sizeof buf, "%.6f", fm.forecasts(d, h));
            out << ',' << buf;
        }
        out << "\n";
    }
}

ForecastMatrix read_forecast_csv(const std::string& path, const std::string& model_id) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty forecast file '" + path + "'");

    ForecastMatrix fm;
    fm.model_id = model_id;
    std::vector<std::array<double, 24>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() != 25)
            throw DataError("malformed forecast row on line " + std::to_string(lineno));
        fm.dates.push_back(parse_date(f[0]));
        std::array<double, 24> r{};
        for (int h = 0; h < 24; ++h) r[static_cast<size_t>(h)] = parse_price(f[static_cast<size_t>(h + 1)], lineno);
        rows.push_back(r);
    }
    fm.forecasts.resize(static_cast<long>(rows.size()), 24);
    for (long d = 0; d < fm.forecasts.rows(); ++d)
        for (int h = 0; h < 24; ++h) fm.forecasts(d, h) = rows[static_cast<size_t>(d)][static_cast<size_t>(h)];
    return fm;
}

void attach_realized(ForecastMatrix& fm, const PriceSeries& s) {
    fm.realized.resize(fm.days(), 24);
    for (long d = 0; d < fm.days(); ++d) {
        const long idx = static_cast<long>(fm.dates[static_cast<size_t>(d)] - s.start);
        if (idx < 0 || idx >= s.days())
            throw DataError("realized prices missing for " + format_date(fm.dates[static_cast<size_t>(d)]));
        fm.realized.row(d) = s.prices.row(idx);
    }
}

}  // namespace epf

#pragma once

#include <array>
#include <string>
#include <vector>
#include <Eigen/Dense>

#include "epf/dates.hpp"

namespace epf {

// Dense day-by-hour price panel. Rows are consecutive calendar days,
// columns are hours 1..24. Immutable after ingestion; windows are
// read-only views and safe to share across workers.
struct PriceSeries {
    DaySerial start = 0;    // date of row 0
    int start_weekday = 1;  // weekday of row 0, 1 = Monday ... 7 = Sunday
    Eigen::MatrixXd prices; // D x 24
    std::string market_id;

    long days() const { return prices.rows(); }
    DaySerial date_of(long d) const { return start + d; }
    int weekday_of_day(long d) const { return weekday_after(start_weekday, d); }
};

enum class CsvFormat { Long, Wide };

// Hourly observations grouped by calendar day before the clock-change
// repair has run; an hour may be absent (spring change) or observed twice
// (autumn change).
struct RawSeries {
    DaySerial start = 0;
    std::vector<std::array<std::vector<double>, 24>> obs;  // per day, per hour
    std::string market_id;
};

// Long format: header "date,hour,price" (hour 1..24); wide format: header
// "date,h1,...,h24". Duplicate and missing hours are preserved for
// repair_clock_change; a whole day absent from the file is a MissingDay
// error in both loaders.
RawSeries load_csv_raw(const std::string& path, CsvFormat fmt);

// Strict loader: any missing or duplicated hour is an error. start_weekday
// is derived from the first date; pass 1..7 to override, 0 to derive.
PriceSeries load_csv(const std::string& path, CsvFormat fmt, int start_weekday = 0);

// Fills a missing hour with the mean of its two temporal neighbours and
// replaces a doubled hour by the mean of its two observations. Throws
// DataError ("unrepairable day") when a day has two or more missing or
// doubled hours.
PriceSeries repair_clock_change(const RawSeries& raw, int start_weekday = 0);

// Canonical wide CSV: date,h1..h24 with shortest-round-trip formatting.
void write_series_csv(const PriceSeries& s, const std::string& path);

struct WindowPlan {
    long calib_len = 730;
    long first_forecast_day = 730;
    long last_forecast_day = 0;
    long stride = 1;

    void validate() const;
    std::vector<long> forecast_days() const;
};

struct CalibWindow {
    Eigen::Ref<const Eigen::MatrixXd> prices;  // calib_len x 24, view into the series
    DaySerial target_date;
    long first_day;  // absolute index of the window's first row
    int weekday0;    // weekday of the window's first row
};

// The calib_len days immediately preceding forecast day t.
CalibWindow window(const PriceSeries& s, const WindowPlan& plan, long t);

// Per-model forecasts aligned against realized prices.
struct ForecastMatrix {
    std::string model_id;
    std::vector<DaySerial> dates;
    Eigen::MatrixXd forecasts;  // D_test x 24
    Eigen::MatrixXd realized;   // D_test x 24; empty until attached

    long days() const { return forecasts.rows(); }
};

// One CSV per model: date,h1..h24, six decimal digits.
void write_forecast_csv(const ForecastMatrix& fm, const std::string& path);
ForecastMatrix read_forecast_csv(const std::string& path, const std::string& model_id);

// Copies the realized rows matching fm.dates out of the series.
void attach_realized(ForecastMatrix& fm, const PriceSeries& s);

}  // namespace epf

#include "epf/dates.hpp"

#include <cstdio>

#include "epf/errors.hpp"

namespace epf {

// Civil <-> serial conversions after Howard Hinnant's chrono-compatible
// algorithms; valid far beyond any date this library will ever see.
DaySerial days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<DaySerial>(era) * 146097 + static_cast<DaySerial>(doe) - 719468;
}

void civil_from_days(DaySerial z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const DaySerial era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = yr + (m <= 2);
}

DaySerial parse_date(const std::string& iso) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
        throw DataError("bad date '" + iso + "', expected YYYY-MM-DD");
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw DataError("bad date '" + iso + "', expected YYYY-MM-DD");
    return days_from_civil(y, m, d);
}

std::string format_date(DaySerial serial) {
    int y;
    unsigned m, d;
    civil_from_days(serial, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
}

int weekday_of(DaySerial serial) {
    // 1970-01-01 was a Thursday.
    return static_cast<int>(((serial % 7) + 10) % 7) + 1;
}

unsigned month_of(DaySerial serial) {
    int y;
    unsigned m, d;
    civil_from_days(serial, y, m, d);
    return m;
}

int weekday_after(int weekday, long days) {
    long w = (weekday - 1 + days) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w) + 1;
}

}  // namespace epf

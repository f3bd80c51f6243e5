#pragma once

#include <cstdint>
#include <string>

namespace epf {

// Serial day number: days since 1970-01-01. Plain integer arithmetic, no
// timezone handling anywhere in the library.
using DaySerial = std::int64_t;

DaySerial days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(DaySerial serial, int& year, unsigned& month, unsigned& day);

// Strict "YYYY-MM-DD". Throws DataError on anything else.
DaySerial parse_date(const std::string& iso);
std::string format_date(DaySerial serial);

// 1 = Monday ... 7 = Sunday.
int weekday_of(DaySerial serial);
unsigned month_of(DaySerial serial);

// Roll a 1..7 weekday forward by `days` (may be negative).
int weekday_after(int weekday, long days);

}  // namespace epf

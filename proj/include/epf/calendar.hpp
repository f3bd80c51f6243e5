#pragma once

#include <array>
#include <Eigen/Dense>

namespace epf {

// Seasonal indicator families: hour-of-day (24 buckets), day-of-week (7),
// hour-of-week (168). The product identity HoW^{j+24(k-1)} = DoW^k * HoD^j
// ties the three together and is asserted by the test suite.
enum class DummyKind { HoD, DoW, HoW };

// 1 iff (day d, hour h) falls into bucket k of the given dummy family.
// Days are counted from a window whose first day has weekday `weekday0`
// (1 = Monday ... 7 = Sunday); hours run 1..24.
int dummy_value(DummyKind kind, int k, long d, int h, int weekday0);

// Bucket averages of a transformed window. OLS on a pure dummy design with
// no intercept reduces to exactly these means, which is how they are
// computed here (the equivalence is oracle-tested).
struct SeasonalMeans {
    std::array<double, 168> how{};  // index (weekday-1)*24 + (hour-1)
    std::array<double, 24> hod{};
    std::array<double, 7> dow{};
    double overall = 0.0;

    double how_at(int weekday, int h) const { return how[(weekday - 1) * 24 + (h - 1)]; }
    double hod_at(int h) const { return hod[h - 1]; }
    double dow_at(int weekday) const { return dow[weekday - 1]; }
};

SeasonalMeans fit_means(const Eigen::MatrixXd& Y, int weekday0);

}  // namespace epf

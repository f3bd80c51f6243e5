#include "epf/transform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "epf/errors.hpp"

namespace epf {

namespace {

double median_inplace(std::vector<double>& v) {
    const size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    // even count: mean of the two central order statistics
    double hi = *mid;
    double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

TransformSpec fit_transform(const Eigen::MatrixXd& calib) {
    if (calib.size() == 0) throw DataError("fit_transform: empty calibration block");
    if (!calib.allFinite()) throw DataError("fit_transform: non-finite values in calibration block");

    std::vector<double> flat(calib.data(), calib.data() + calib.size());
    const double a = median_inplace(flat);
    for (double& x : flat) x = std::abs(x - a);
    const double mad = median_inplace(flat);
    if (mad <= 0.0)
        throw NumericError("degenerate window: MAD about the median is zero");
    return TransformSpec{a, mad / kZ075};
}

Eigen::MatrixXd apply(const TransformSpec& t, const Eigen::MatrixXd& prices) {
    return ((prices.array() - t.shift) / t.scale).asinh();
}

Eigen::MatrixXd invert(const TransformSpec& t, const Eigen::MatrixXd& ys) {
    return ys.array().sinh() * t.scale + t.shift;
}

}  // namespace epf

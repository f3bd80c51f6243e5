#pragma once

#include <Eigen/Dense>

namespace epf {

// 75% quantile of the standard normal distribution; dividing the MAD by it
// makes the scale estimate consistent with the standard deviation under
// normality (1/kZ075 = 1.4826...).
inline constexpr double kZ075 = 0.674489750196082;

// Shift/scale pair of the asinh variance-stabilising transform, refit on
// every rolling calibration window.
struct TransformSpec {
    double shift = 0.0;  // sample median of the window
    double scale = 1.0;  // MAD about the median, divided by kZ075

    double apply(double price) const { return std::asinh((price - shift) / scale); }
    double invert(double y) const { return scale * std::sinh(y) + shift; }
};

// shift = median of all cells, scale = median(|x - shift|) / kZ075.
// Throws NumericError when the window is constant (zero MAD) and DataError
// on empty or non-finite input.
TransformSpec fit_transform(const Eigen::MatrixXd& calib);

Eigen::MatrixXd apply(const TransformSpec& t, const Eigen::MatrixXd& prices);
Eigen::MatrixXd invert(const TransformSpec& t, const Eigen::MatrixXd& ys);

}  // namespace epf

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace testutil {

inline constexpr double kPi = std::numbers::pi;

/// n_per_period samples per period over `periods` periods, end point included.
inline std::vector<double> grid(double period, int n_per_period, double periods) {
    const int           n = static_cast<int>(std::lround(n_per_period * periods));
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = period * i / n_per_period;
    return t;
}

inline Eigen::MatrixXd sample(const std::vector<double>& t, const std::function<double(double)>& f) {
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = f(t[i]);
    return x;
}

inline std::vector<double> sample_vec(const std::vector<double>& t, const std::function<double(double)>& f) {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = f(t[i]);
    return x;
}

}  // namespace testutil

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace plss {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2_squared(std::span<const double> a) { return dot(a, a); }

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

/// y = alpha * x
inline void scaled_copy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = alpha * x[i];
}

/// y = beta * y + gamma * x
inline void recurrence_update(double beta, double gamma, std::span<const double> x,
                              std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = beta * y[i] + gamma * x[i];
}

}  // namespace plss

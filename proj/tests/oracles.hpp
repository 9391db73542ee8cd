#pragma once

// Test-only reference computations. Nothing here calls into the library, so
// each oracle stays independent of the code path it checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

// Same map written through ln(kj) - ln(k) instead of ln(kj / k).
inline double greenberg_map(double k, double v0, double kj = 1.0) {
  return v0 * k * (std::log(kj) - std::log(k));
}

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-7) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Plain iteration of the map; returns the last iterate.
inline double iterate_limit(double v0, double k0, std::size_t iterations, double kj = 1.0) {
  double k = k0;
  for (std::size_t i = 0; i < iterations; ++i) k = greenberg_map(k, v0, kj);
  return k;
}

inline std::vector<double> trajectory(double v0, double k0, std::size_t iterations,
                                      double kj = 1.0) {
  std::vector<double> ks{k0};
  for (std::size_t i = 0; i < iterations; ++i) ks.push_back(greenberg_map(ks.back(), v0, kj));
  return ks;
}

// (argmax, max) of f on an n-point uniform grid over [a, b].
inline std::pair<double, double> grid_max(const std::function<double(double)>& f, double a,
                                          double b, std::size_t n) {
  double best_x = a;
  double best = f(a);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double y = f(x);
    if (y > best) {
      best = y;
      best_x = x;
    }
  }
  return {best_x, best};
}

// Average of ln|f'| by brute-force summation along a freshly iterated orbit,
// with f' taken by central differences.
inline double lyapunov_brute_force(double v0, double k0, std::size_t n, std::size_t transient) {
  double k = iterate_limit(v0, k0, transient);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double slope =
        central_difference([v0](double x) { return greenberg_map(x, v0); }, k, 1e-8);
    sum += std::log(std::abs(slope));
    k = greenberg_map(k, v0);
  }
  return sum / static_cast<double>(n);
}

}  // namespace oracle

#include "greenberg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "greenberg/errors.hpp"

namespace greenberg {

namespace {

// Free-flow end of the sampled profile and the hand-off to uniform spacing,
// both as fractions of kj.
constexpr double kSampleFloor = 1e-6;
constexpr double kGeometricSplit = 0.05;

void require_in_diagram(double k, const TrafficParams& p, const char* op) {
  if (!(k >= 0.0) || k > p.kj) {
    throw DomainError(std::string(op) + ": density " + std::to_string(k) +
                      " outside [0, kj]");
  }
}

}  // namespace

void TrafficParams::validate() const {
  if (!std::isfinite(v0) || v0 < 0.0) {
    throw DomainError("optimum velocity v0 must be finite and >= 0, got " +
                      std::to_string(v0));
  }
  if (!std::isfinite(kj) || kj <= 0.0) {
    throw DomainError("jam density kj must be finite and > 0, got " +
                      std::to_string(kj));
  }
}

double velocity_of_density(double k, const TrafficParams& p) {
  require_in_diagram(k, p, "velocity_of_density");
  if (k == 0.0) {
    throw DomainError("velocity_of_density: velocity is unbounded at k = 0");
  }
  if (k == p.kj) return 0.0;
  return p.v0 * std::log(p.kj / k);
}

double flow_of_density(double k, const TrafficParams& p) {
  require_in_diagram(k, p, "flow_of_density");
  if (k == 0.0) return 0.0;
  return k * velocity_of_density(k, p);
}

double density_of_flow_velocity(double q, double v) {
  if (!(v > 0.0)) {
    throw DomainError("density_of_flow_velocity: velocity must be > 0, got " +
                      std::to_string(v));
  }
  return q / v;
}

TrafficState state_at(double k, const TrafficParams& p) {
  const double v = velocity_of_density(k, p);
  return {k, k * v, v};
}

TrafficState optimum_point(const TrafficParams& p) {
  const double k = p.kj / std::numbers::e;
  return {k, p.v0 * k, p.v0};
}

std::vector<TrafficState> diagram_samples(const TrafficParams& p, std::size_t n) {
  if (n < 2) {
    throw ArgumentError("diagram_samples: need at least 2 samples, got " +
                        std::to_string(n));
  }
  p.validate();

  const std::size_t n_geometric = std::max<std::size_t>(1, n / 4);
  const std::size_t n_uniform = n - n_geometric;
  const double k_floor = kSampleFloor * p.kj;
  const double k_split = kGeometricSplit * p.kj;

  std::vector<TrafficState> out;
  out.reserve(n);
  const double ratio = std::log(k_split / k_floor);
  for (std::size_t j = 0; j < n_geometric; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(n_geometric);
    out.push_back(state_at(k_floor * std::exp(ratio * t), p));
  }
  if (n_uniform == 1) {
    out.push_back(state_at(p.kj, p));
  } else {
    const double span = p.kj - k_split;
    for (std::size_t j = 0; j < n_uniform; ++j) {
      const double k =
          j + 1 == n_uniform
              ? p.kj
              : k_split + span * static_cast<double>(j) /
                              static_cast<double>(n_uniform - 1);
      out.push_back(state_at(k, p));
    }
  }
  return out;
}

}  // namespace greenberg

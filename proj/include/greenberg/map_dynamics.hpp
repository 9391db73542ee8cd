#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "greenberg/model.hpp"

namespace greenberg {

inline constexpr std::size_t kDefaultIterations = 300;
inline constexpr double kDefaultSensitivityDelta = 0.001;

/// Result of one application of the map k -> v0 k ln(kj / k).
///
/// When the successor density leaves (0, kj] the step is flagged as escaped;
/// `state.k` then holds the raw successor and `state.q`, `state.v` are NaN.
struct StepResult {
  TrafficState state;
  bool escaped = false;
};

/// An initial density and the states generated from it. `states[0]` is the
/// initial state. If the orbit escaped, `escaped` holds the index of the
/// first out-of-domain iterate (== states.size()) and `escape_density` its
/// value; the escaped iterate itself is not stored.
struct Orbit {
  TrafficParams params;
  double k0 = 0.0;
  std::size_t steps = 0;  ///< iterations requested
  std::vector<TrafficState> states;
  std::optional<std::size_t> escaped;
  std::optional<double> escape_density;

  [[nodiscard]] std::vector<double> densities() const;
};

struct SensitivityResult {
  Orbit orbit_a;
  Orbit orbit_b;
  double threshold = 0.0;
  std::vector<double> separation;
  std::optional<std::size_t> first_divergence_index;
};

struct PathPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PathPoint&, const PathPoint&) = default;
};

StepResult step(double k, const TrafficParams& p);

// Orbit of n iterations from k0 in (0, kj). Truncated, not thrown, on escape.
Orbit iterate(double k0, const TrafficParams& p, std::size_t n = kDefaultIterations);

// v_i = v0 ln(kj / k_i) for every stored state.
std::vector<double> velocity_sequence(const Orbit& orbit);

// d/dk [v0 k ln(kj/k)] = v0 (ln(kj/k) - 1).
double map_derivative(double k, const TrafficParams& p);

/// Staircase (k0,k0) -> (k0,q0) -> (q0,q0) -> ... on the flow-density plane.
/// Always has 2 (len - 1) + 1 vertices; a fixed-point orbit yields coincident
/// vertices.
std::vector<PathPoint> cobweb_path(const Orbit& orbit);

/// True when every vertex coincides with the first to within `tol`.
bool is_degenerate(const std::vector<PathPoint>& path, double tol = 1e-12);

SensitivityResult sensitivity_experiment(double k0, double delta,
                                         const TrafficParams& p,
                                         std::size_t n = kDefaultIterations,
                                         double threshold = 0.1);

}  // namespace greenberg

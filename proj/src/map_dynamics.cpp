#include "greenberg/map_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "greenberg/errors.hpp"

namespace greenberg {

namespace {

void require_open_interval(double k0, const TrafficParams& p, const char* op) {
  if (!(k0 > 0.0) || !(k0 < p.kj)) {
    throw DomainError(std::string(op) + ": initial density " +
                      std::to_string(k0) + " outside (0, kj)");
  }
}

void require_half_open(double k, const TrafficParams& p, const char* op) {
  if (!(k > 0.0) || k > p.kj) {
    throw DomainError(std::string(op) + ": density " + std::to_string(k) +
                      " outside (0, kj]");
  }
}

}  // namespace

std::vector<double> Orbit::densities() const {
  std::vector<double> ks;
  ks.reserve(states.size());
  for (const auto& s : states) ks.push_back(s.k);
  return ks;
}

StepResult step(double k, const TrafficParams& p) {
  p.validate();
  require_half_open(k, p, "step");
  // Next density is the current flow.
  const double next = flow_of_density(k, p);
  if (next > 0.0 && next <= p.kj) {
    return {state_at(next, p), false};
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {{next, nan, nan}, true};
}

Orbit iterate(double k0, const TrafficParams& p, std::size_t n) {
  p.validate();
  require_open_interval(k0, p, "iterate");
  if (n < 1) throw ArgumentError("iterate: need at least one iteration");

  Orbit orbit{.params = p, .k0 = k0, .steps = n, .states = {}, .escaped = {},
              .escape_density = {}};
  orbit.states.reserve(n + 1);
  orbit.states.push_back(state_at(k0, p));
  for (std::size_t i = 1; i <= n; ++i) {
    const StepResult r = step(orbit.states.back().k, p);
    if (r.escaped) {
      orbit.escaped = i;
      orbit.escape_density = r.state.k;
      break;
    }
    orbit.states.push_back(r.state);
  }
  return orbit;
}

std::vector<double> velocity_sequence(const Orbit& orbit) {
  std::vector<double> vs;
  vs.reserve(orbit.states.size());
  for (const auto& s : orbit.states) {
    vs.push_back(velocity_of_density(s.k, orbit.params));
  }
  return vs;
}

double map_derivative(double k, const TrafficParams& p) {
  require_half_open(k, p, "map_derivative");
  return p.v0 * (std::log(p.kj / k) - 1.0);
}

std::vector<PathPoint> cobweb_path(const Orbit& orbit) {
  std::vector<PathPoint> path;
  if (orbit.states.empty()) return path;
  path.reserve(2 * orbit.states.size() - 1);
  const double k0 = orbit.states.front().k;
  path.push_back({k0, k0});
  for (std::size_t i = 0; i + 1 < orbit.states.size(); ++i) {
    const auto& s = orbit.states[i];
    path.push_back({s.k, s.q});
    path.push_back({s.q, s.q});
  }
  return path;
}

bool is_degenerate(const std::vector<PathPoint>& path, double tol) {
  if (path.empty()) return true;
  const PathPoint first = path.front();
  return std::all_of(path.begin(), path.end(), [&](const PathPoint& pt) {
    return std::abs(pt.x - first.x) <= tol && std::abs(pt.y - first.y) <= tol;
  });
}

SensitivityResult sensitivity_experiment(double k0, double delta,
                                         const TrafficParams& p, std::size_t n,
                                         double threshold) {
  if (!(threshold > 0.0)) {
    throw ArgumentError("sensitivity_experiment: threshold must be > 0");
  }
  p.validate();
  require_open_interval(k0, p, "sensitivity_experiment");
  require_open_interval(k0 + delta, p, "sensitivity_experiment");

  SensitivityResult r{.orbit_a = iterate(k0, p, n),
                      .orbit_b = iterate(k0 + delta, p, n),
                      .threshold = threshold,
                      .separation = {},
                      .first_divergence_index = {}};
  const std::size_t len =
      std::min(r.orbit_a.states.size(), r.orbit_b.states.size());
  r.separation.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double d = std::abs(r.orbit_a.states[i].k - r.orbit_b.states[i].k);
    r.separation.push_back(d);
    if (!r.first_divergence_index && d > threshold) r.first_divergence_index = i;
  }
  return r;
}

}  // namespace greenberg

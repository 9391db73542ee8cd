#pragma once

#include <cstddef>
#include <vector>

namespace greenberg {

/// Parameters of the normalized Greenberg relation v = v0 ln(kj / k).
struct TrafficParams {
  double v0 = 1.0;  ///< optimum (critical) velocity, v0 >= 0
  double kj = 1.0;  ///< jam density, kj > 0

  /// Throws DomainError when v0 < 0, kj <= 0 or either is non-finite.
  void validate() const;
};

/// One point on the fundamental diagrams, tied together by q = v k.
struct TrafficState {
  double k = 0.0;  ///< density
  double q = 0.0;  ///< flow
  double v = 0.0;  ///< velocity
};

// v0 ln(kj / k). DomainError for k <= 0 (unbounded) or k > kj.
double velocity_of_density(double k, const TrafficParams& p);

// v0 k ln(kj / k), continuous extension q(0) = 0. DomainError for k < 0 or k > kj.
double flow_of_density(double k, const TrafficParams& p);

// k = q / v. DomainError for v <= 0.
double density_of_flow_velocity(double q, double v);

/// Full state at density k in (0, kj].
TrafficState state_at(double k, const TrafficParams& p);

/// Maximum-flow point: k = kj/e, q = v0 kj/e, v = v0.
TrafficState optimum_point(const TrafficParams& p);

/// n states at strictly increasing densities spanning (0, kj], used to draw
/// the three diagram profiles. The free-flow end is geometrically spaced since
/// velocity diverges logarithmically as k -> 0. ArgumentError for n < 2.
std::vector<TrafficState> diagram_samples(const TrafficParams& p, std::size_t n);

}  // namespace greenberg

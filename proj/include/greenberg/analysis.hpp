#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "greenberg/map_dynamics.hpp"
#include "greenberg/model.hpp"

namespace greenberg {

inline constexpr double kPeriodTolerance = 1e-6;
inline constexpr std::size_t kMaxPeriod = 64;
inline constexpr std::size_t kScanTotal = 300;
inline constexpr std::size_t kScanKeep = 60;
inline constexpr double kScanInitialDensity = 0.25;
inline constexpr std::size_t kLyapunovTerms = 10000;
inline constexpr std::size_t kLyapunovTransient = 1000;
// |f'(k)| below this is treated as the superstable point k = kj/e.
inline constexpr double kSingularityFloor = 1e-300;

enum class FixedPointKind { kSink, kSource, kCenter, kDegenerate };

std::string_view to_string(FixedPointKind kind);

struct FixedPointReport {
  double v0 = 0.0;
  double k_star = 0.0;
  double multiplier = 0.0;
  FixedPointKind classification = FixedPointKind::kDegenerate;
  bool exponentially_stable = false;
};

/// Decay certificate |k_i| <= M beta^i |k_0| claimed by the contraction
/// argument when v0 < 1.
struct StabilityCertificate {
  double m = 1.0;
  double beta = 0.0;
};

struct StabilityCheck {
  bool stable = false;
  std::optional<StabilityCertificate> certificate;
};

// Smallest period p, or nullopt when aperiodic up to max_period.
using Period = std::optional<std::size_t>;

struct ScanSettings {
  double k0 = kScanInitialDensity;
  std::size_t n_total = kScanTotal;
  std::size_t n_keep = kScanKeep;
  double tolerance = kPeriodTolerance;
};

struct BifurcationPoint {
  double v0 = 0.0;
  std::vector<TrafficState> samples;  ///< last n_keep in-domain states
  Period detected_period;
  bool escaped = false;
};

struct BifurcationScan {
  ScanSettings settings;
  double kj = 1.0;
  std::vector<BifurcationPoint> points;  ///< ascending v0
};

struct LyapunovEstimate {
  double lambda = 0.0;
  std::size_t n_terms = 0;   ///< terms actually averaged
  std::size_t skipped = 0;   ///< terms dropped at the singularity floor
};

struct LyapunovPoint {
  double v0 = 0.0;
  std::optional<double> lambda;  ///< missing when the orbit escaped
  std::size_t n_terms = 0;
  std::size_t skipped_terms = 0;
};

struct LyapunovSettings {
  double k0 = 0.1;
  std::size_t n = kLyapunovTerms;
  std::size_t n_transient = kLyapunovTransient;
};

struct LyapunovCurve {
  LyapunovSettings settings;
  double kj = 1.0;
  std::vector<LyapunovPoint> points;  ///< ascending v0
};

/// kj e^{-1/v0}. DomainError for v0 <= 0.
double fixed_point(const TrafficParams& p);

FixedPointReport classify_fixed_point(const TrafficParams& p);

/// Parameter where the fixed-point multiplier 1 - v0 reaches -1.
constexpr double period_doubling_threshold() { return 2.0; }

/// Smallest p <= max_period with |x[i+p] - x[i]| < tolerance for every i.
/// ArgumentError if samples.size() < 2 max_period or tolerance <= 0.
Period detect_period(std::span<const double> samples,
                     double tolerance = kPeriodTolerance,
                     std::size_t max_period = kMaxPeriod);

/// One point of a scan: iterate, keep the tail, detect the period.
BifurcationPoint scan_point(const TrafficParams& p, const ScanSettings& s);

/// Equally spaced grid of `steps` values from v0_min to v0_max inclusive.
/// Requires 0 < v0_min <= v0_max <= e (v0_min < v0_max when steps > 1).
BifurcationScan bifurcation_scan(double v0_min, double v0_max, std::size_t steps,
                                 const ScanSettings& s = {}, double kj = 1.0);

/// Mean of ln|f'(k_j)| over n orbit points after discarding n_transient.
/// EscapeError if the orbit leaves (0, kj] first.
LyapunovEstimate lyapunov_exponent(const TrafficParams& p, double k0,
                                   std::size_t n = kLyapunovTerms,
                                   std::size_t n_transient = kLyapunovTransient);

LyapunovCurve lyapunov_curve(double v0_min, double v0_max, std::size_t steps,
                             const LyapunovSettings& s = {}, double kj = 1.0);

/// Hypothesis test of the contraction argument: for kj = 1 and v0 < 1 the
/// certificate (M = 1, beta = v0) is reported.
StabilityCheck exponential_stability_check(const TrafficParams& p);

/// Ascending grid shared by both sweeps.
std::vector<double> parameter_grid(double v0_min, double v0_max, std::size_t steps);

/// Worker count for sweeps: GREENBERG_DYN_THREADS if set and > 0, else
/// hardware concurrency.
std::size_t sweep_threads();

}  // namespace greenberg

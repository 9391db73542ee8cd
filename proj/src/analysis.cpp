#include "greenberg/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "greenberg/errors.hpp"

namespace greenberg {

namespace {

void require_sweep_range(double v0_min, double v0_max, std::size_t steps,
                         const char* op) {
  const std::string name(op);
  if (steps < 1) throw ArgumentError(name + ": steps must be >= 1");
  if (!std::isfinite(v0_min) || !std::isfinite(v0_max) || !(v0_min > 0.0)) {
    throw ArgumentError(name + ": v0_min must be finite and > 0");
  }
  if (v0_max > std::numbers::e) {
    throw ArgumentError(name + ": v0_max must be <= e (orbits escape (0, kj] above it)");
  }
  if (steps == 1 ? v0_min != v0_max : !(v0_min < v0_max)) {
    throw ArgumentError(name + ": need v0_min < v0_max (or equal with steps = 1)");
  }
}

// Runs body(i) for i in [0, count) on up to sweep_threads() workers. Each
// index is written by exactly one worker so output order is the index order.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(count, sweep_threads());
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::kSink: return "sink";
    case FixedPointKind::kSource: return "source";
    case FixedPointKind::kCenter: return "center";
    case FixedPointKind::kDegenerate: return "degenerate";
  }
  return "unknown";
}

double fixed_point(const TrafficParams& p) {
  p.validate();
  if (!(p.v0 > 0.0)) {
    throw DomainError("fixed_point: v0 must be > 0 (the map collapses at v0 = 0)");
  }
  return p.kj * std::exp(-1.0 / p.v0);
}

FixedPointReport classify_fixed_point(const TrafficParams& p) {
  p.validate();
  FixedPointReport r;
  r.v0 = p.v0;
  r.multiplier = 1.0 - p.v0;
  r.exponentially_stable = p.v0 < 1.0;
  if (p.v0 == 0.0) {
    r.k_star = 0.0;
    r.classification = FixedPointKind::kDegenerate;
    return r;
  }
  r.k_star = fixed_point(p);
  const double m = std::abs(r.multiplier);
  if (m < 1.0) {
    r.classification = FixedPointKind::kSink;
  } else if (m > 1.0) {
    r.classification = FixedPointKind::kSource;
  } else {
    r.classification = FixedPointKind::kCenter;
  }
  return r;
}

Period detect_period(std::span<const double> samples, double tolerance,
                     std::size_t max_period) {
  if (!(tolerance > 0.0)) throw ArgumentError("detect_period: tolerance must be > 0");
  if (max_period < 1) throw ArgumentError("detect_period: max_period must be >= 1");
  if (samples.size() < 2 * max_period) {
    throw ArgumentError("detect_period: need at least " +
                        std::to_string(2 * max_period) + " samples, got " +
                        std::to_string(samples.size()));
  }
  for (std::size_t period = 1; period <= max_period; ++period) {
    bool closes = true;
    for (std::size_t i = 0; i + period < samples.size(); ++i) {
      if (!(std::abs(samples[i + period] - samples[i]) < tolerance)) {
        closes = false;
        break;
      }
    }
    if (closes) return period;
  }
  return std::nullopt;
}

BifurcationPoint scan_point(const TrafficParams& p, const ScanSettings& s) {
  if (s.n_keep < 2 || s.n_keep >= s.n_total) {
    throw ArgumentError("scan: need 2 <= n_keep < n_total");
  }
  const Orbit orbit = iterate(s.k0, p, s.n_total);
  BifurcationPoint point{.v0 = p.v0, .samples = {}, .detected_period = {},
                         .escaped = orbit.escaped.has_value()};
  const std::size_t keep = std::min(s.n_keep, orbit.states.size());
  point.samples.assign(orbit.states.end() - static_cast<std::ptrdiff_t>(keep),
                       orbit.states.end());
  if (point.escaped) return point;

  std::vector<double> ks;
  ks.reserve(point.samples.size());
  for (const auto& st : point.samples) ks.push_back(st.k);
  point.detected_period =
      detect_period(ks, s.tolerance, std::min(kMaxPeriod, ks.size() / 2));
  return point;
}

std::vector<double> parameter_grid(double v0_min, double v0_max, std::size_t steps) {
  std::vector<double> grid(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    grid[i] = steps == 1 ? v0_min
                         : v0_min + (v0_max - v0_min) * static_cast<double>(i) /
                                        static_cast<double>(steps - 1);
  }
  if (steps > 1) grid.back() = v0_max;
  return grid;
}

BifurcationScan bifurcation_scan(double v0_min, double v0_max, std::size_t steps,
                                 const ScanSettings& s, double kj) {
  require_sweep_range(v0_min, v0_max, steps, "bifurcation_scan");
  if (s.n_keep < 2 || s.n_keep >= s.n_total) {
    throw ArgumentError("bifurcation_scan: need 2 <= n_keep < n_total");
  }
  if (!(s.tolerance > 0.0)) throw ArgumentError("bifurcation_scan: tolerance must be > 0");
  TrafficParams{.v0 = v0_min, .kj = kj}.validate();
  if (!(s.k0 > 0.0) || !(s.k0 < kj)) {
    throw DomainError("bifurcation_scan: k0 outside (0, kj)");
  }

  const std::vector<double> grid = parameter_grid(v0_min, v0_max, steps);
  BifurcationScan scan{.settings = s, .kj = kj, .points = {}};
  scan.points.resize(steps);
  parallel_for(steps, [&](std::size_t i) {
    scan.points[i] = scan_point({.v0 = grid[i], .kj = kj}, s);
  });
  return scan;
}

LyapunovEstimate lyapunov_exponent(const TrafficParams& p, double k0,
                                   std::size_t n, std::size_t n_transient) {
  p.validate();
  if (!(k0 > 0.0) || !(k0 < p.kj)) {
    throw DomainError("lyapunov_exponent: k0 outside (0, kj)");
  }
  if (n < 1) throw ArgumentError("lyapunov_exponent: need n >= 1");

  double k = k0;
  auto advance = [&](std::size_t i) {
    const StepResult r = step(k, p);
    if (r.escaped) {
      throw EscapeError("lyapunov_exponent: orbit left (0, kj] at iteration " +
                        std::to_string(i + 1) + " for v0 = " + std::to_string(p.v0));
    }
    k = r.state.k;
  };

  for (std::size_t i = 0; i < n_transient; ++i) advance(i);

  LyapunovEstimate est;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double slope = std::abs(map_derivative(k, p));
    if (slope < kSingularityFloor) {
      ++est.skipped;
    } else {
      sum += std::log(slope);
      ++est.n_terms;
    }
    if (j + 1 < n) advance(n_transient + j);
  }
  if (est.n_terms == 0) {
    throw DomainError("lyapunov_exponent: every term hit the singularity floor");
  }
  est.lambda = sum / static_cast<double>(est.n_terms);
  return est;
}

LyapunovCurve lyapunov_curve(double v0_min, double v0_max, std::size_t steps,
                             const LyapunovSettings& s, double kj) {
  require_sweep_range(v0_min, v0_max, steps, "lyapunov_curve");
  TrafficParams{.v0 = v0_min, .kj = kj}.validate();
  if (!(s.k0 > 0.0) || !(s.k0 < kj)) {
    throw DomainError("lyapunov_curve: k0 outside (0, kj)");
  }
  if (s.n < 1) throw ArgumentError("lyapunov_curve: need n >= 1");

  const std::vector<double> grid = parameter_grid(v0_min, v0_max, steps);
  LyapunovCurve curve{.settings = s, .kj = kj, .points = {}};
  curve.points.resize(steps);
  parallel_for(steps, [&](std::size_t i) {
    LyapunovPoint& pt = curve.points[i];
    pt.v0 = grid[i];
    try {
      const LyapunovEstimate e =
          lyapunov_exponent({.v0 = grid[i], .kj = kj}, s.k0, s.n, s.n_transient);
      pt.lambda = e.lambda;
      pt.n_terms = e.n_terms;
      pt.skipped_terms = e.skipped;
    } catch (const EscapeError&) {
      pt.lambda.reset();
    } catch (const DomainError&) {
      // Superstable orbit (v0 = 1 lands on kj/e): every term is singular.
      pt.lambda.reset();
      pt.skipped_terms = s.n;
    }
  });
  return curve;
}

StabilityCheck exponential_stability_check(const TrafficParams& p) {
  p.validate();
  if (p.kj != 1.0 || !(p.v0 < 1.0)) return {};
  return {.stable = true, .certificate = StabilityCertificate{.m = 1.0, .beta = p.v0}};
}

std::size_t sweep_threads() {
  if (const char* env = std::getenv("GREENBERG_DYN_THREADS")) {
    char* end = nullptr;
    const long requested = std::strtol(env, &end, 10);
    if (end != env && requested > 0) return static_cast<std::size_t>(requested);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace greenberg

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "greenberg/errors.hpp"
#include "greenberg/map_dynamics.hpp"
#include "oracles.hpp"

using namespace greenberg;
using Catch::Approx;

TEST_CASE("step examples", "[dynamics]") {
  const double k_star = std::exp(-1.0 / 2.25);
  CHECK(k_star == Approx(0.64118).margin(1e-5));
  const StepResult at_fixed = step(k_star, {.v0 = 2.25});
  CHECK_FALSE(at_fixed.escaped);
  CHECK(at_fixed.state.k == Approx(k_star).epsilon(1e-14));

  const StepResult first = step(0.25, {.v0 = 0.25});
  CHECK(first.state.k == Approx(0.08664).margin(1e-5));
  CHECK(first.state.q == flow_of_density(first.state.k, {.v0 = 0.25}));
  CHECK(first.state.v == velocity_of_density(first.state.k, {.v0 = 0.25}));

  const StepResult jam = step(1.0, {.v0 = 1.7});
  CHECK(jam.escaped);
  CHECK(jam.state.k == 0.0);
  CHECK(std::isnan(jam.state.v));

  CHECK_THROWS_AS(step(0.0, {.v0 = 1.0}), DomainError);
  CHECK_THROWS_AS(step(1.2, {.v0 = 1.0}), DomainError);
}

TEST_CASE("step flags successors above kj", "[dynamics]") {
  // v0 > e pushes the map maximum above kj.
  const StepResult r = step(1.0 / std::numbers::e, {.v0 = 3.0});
  CHECK(r.escaped);
  CHECK(r.state.k > 1.0);
}

TEST_CASE("iterate reproduces the published sinks", "[dynamics]") {
  SECTION("empty-road regime") {
    const Orbit o = iterate(0.25, {.v0 = 0.25}, 300);
    REQUIRE(o.states.size() == 301);
    CHECK_FALSE(o.escaped);
    CHECK(std::abs(o.states.back().k - 0.0183) < 1e-4);
    CHECK(std::abs(o.states.back().v - 1.0) < 1e-3);
  }
  SECTION("congested regime") {
    const Orbit o = iterate(0.1, {.v0 = 1.25}, 300);
    CHECK(std::abs(o.states.back().k - 0.4493) < 1e-4);
    CHECK(std::abs(o.states.back().v - 1.0) < 1e-9);
  }
  SECTION("fixed point is stationary") {
    const double k_star = std::exp(-2.0 / 3.0);
    const Orbit o = iterate(k_star, {.v0 = 1.5}, 10);
    REQUIRE(o.states.size() == 11);
    for (const auto& s : o.states) CHECK(s.k == Approx(k_star).epsilon(1e-15));
  }
}

TEST_CASE("iterate errors and escape handling", "[dynamics][errors]") {
  CHECK_THROWS_AS(iterate(0.0, {.v0 = 1.0}, 10), DomainError);
  CHECK_THROWS_AS(iterate(1.0, {.v0 = 1.0}, 10), DomainError);
  CHECK_THROWS_AS(iterate(0.5, {.v0 = 1.0}, 0), ArgumentError);
  CHECK_THROWS_AS(iterate(0.5, {.v0 = -1.0}, 10), DomainError);

  const Orbit o = iterate(0.3, {.v0 = 3.5}, 300);
  REQUIRE(o.escaped.has_value());
  CHECK(*o.escaped == o.states.size());
  REQUIRE(o.escape_density.has_value());
  CHECK((*o.escape_density > 1.0 || *o.escape_density <= 0.0));
  for (const auto& s : o.states) {
    CHECK(s.k > 0.0);
    CHECK(s.k <= 1.0);
  }
}

TEST_CASE("orbit recurrence and state consistency", "[dynamics][property]") {
  const double v0 = GENERATE(take(8, random(0.05, std::numbers::e)));
  const double k0 = GENERATE(take(3, random(0.001, 0.999)));
  const TrafficParams p{.v0 = v0};
  const Orbit o = iterate(k0, p, 300);
  // Forward invariance for v0 <= e.
  CHECK_FALSE(o.escaped);
  for (std::size_t i = 0; i + 1 < o.states.size(); ++i) {
    CHECK(o.states[i + 1].k == flow_of_density(o.states[i].k, p));
    CHECK(o.states[i].q == o.states[i + 1].k);
  }
  for (const auto& s : o.states) {
    CHECK(s.k > 0.0);
    CHECK(s.k <= 1.0);
    CHECK(s.v == velocity_of_density(s.k, p));
    CHECK(std::abs(s.q - s.v * s.k) < 1e-12);
  }
  // Bit-identical on repetition.
  const Orbit again = iterate(k0, p, 300);
  REQUIRE(again.states.size() == o.states.size());
  for (std::size_t i = 0; i < o.states.size(); ++i) CHECK(again.states[i].k == o.states[i].k);
}

TEST_CASE("velocity_sequence", "[dynamics]") {
  const double k_star = std::exp(-1.0 / 1.5);
  for (const double v : velocity_sequence(iterate(k_star, {.v0 = 1.5}, 20))) {
    CHECK(v == Approx(1.0).epsilon(1e-12));
  }
  const Orbit cycle = iterate(0.35, {.v0 = 2.25}, 300);
  const auto vs = velocity_sequence(cycle);
  REQUIRE(vs.size() == cycle.states.size());
  const double a = vs[vs.size() - 1];
  const double b = vs[vs.size() - 2];
  CHECK(std::abs(std::max(a, b) - 2.3409) < 1e-3);
  CHECK(std::abs(std::min(a, b) - 0.4272) < 1e-3);

  Orbit jam;
  jam.params = {.v0 = 2.0};
  jam.states = {state_at(1.0, jam.params)};
  CHECK(velocity_sequence(jam) == std::vector<double>{0.0});
}

TEST_CASE("map_derivative", "[dynamics]") {
  const double v0 = 2.25;
  CHECK(map_derivative(std::exp(-1.0 / v0), {.v0 = v0}) == Approx(-1.25).epsilon(1e-14));
  CHECK(map_derivative(1.0 / std::numbers::e, {.v0 = 3.3}) == Approx(0.0).margin(1e-15));
  CHECK(map_derivative(0.5, {.v0 = 1.0}) == Approx(std::log(2.0) - 1.0).epsilon(1e-15));
  CHECK_THROWS_AS(map_derivative(0.0, {.v0 = 1.0}), DomainError);
  CHECK_THROWS_AS(map_derivative(1.01, {.v0 = 1.0}), DomainError);
}

TEST_CASE("map_derivative matches central differences", "[dynamics][oracle]") {
  const double v0 = GENERATE(0.25, 1.0, 2.585);
  for (int i = 0; i < 1000; ++i) {
    const double k = 0.01 + 0.98 * i / 999.0;
    const double fd = oracle::central_difference(
        [v0](double x) { return oracle::greenberg_map(x, v0); }, k, 1e-7);
    const double exact = map_derivative(k, {.v0 = v0});
    // Near k = 1/e the slope vanishes; fall back to an absolute bound there.
    CHECK(std::abs(exact - fd) <= 1e-6 * std::max(std::abs(fd), 1e-2));
  }
}

TEST_CASE("cobweb_path", "[dynamics]") {
  const Orbit o = iterate(0.25, {.v0 = 0.25}, 5);
  const auto path = cobweb_path(o);
  REQUIRE(path.size() == 2 * (o.states.size() - 1) + 1);
  CHECK(path[0] == PathPoint{0.25, 0.25});
  CHECK(path[1].x == 0.25);
  CHECK(path[1].y == Approx(0.08664).margin(1e-5));
  CHECK(path[2].x == path[2].y);
  CHECK(path[2].x == o.states[1].k);
  CHECK_FALSE(is_degenerate(path));

  const double k_star = std::exp(-2.0 / 3.0);
  const auto still = cobweb_path(iterate(k_star, {.v0 = 1.5}, 10));
  CHECK(still.size() == 21);
  CHECK(is_degenerate(still));
}

TEST_CASE("sensitivity_experiment", "[dynamics]") {
  SECTION("chaotic parameter diverges") {
    const auto r = sensitivity_experiment(0.1, 0.001, {.v0 = 2.585}, 300, 0.1);
    REQUIRE(r.first_divergence_index.has_value());
    CHECK(r.separation[*r.first_divergence_index] > 0.1);
    CHECK(r.separation[0] == std::abs(r.orbit_a.states[0].k - r.orbit_b.states[0].k));
    CHECK(r.separation.size() == 301);
  }
  SECTION("sink absorbs both orbits") {
    const auto r = sensitivity_experiment(0.1, 0.001, {.v0 = 1.25}, 300, 0.01);
    CHECK_FALSE(r.first_divergence_index.has_value());
    CHECK(std::abs(r.orbit_a.states.back().k - 0.4493) < 1e-4);
    CHECK(std::abs(r.orbit_b.states.back().k - 0.4493) < 1e-4);
  }
  SECTION("zero offset") {
    const auto r = sensitivity_experiment(0.3, 0.0, {.v0 = 2.585}, 100, 0.1);
    for (const double d : r.separation) CHECK(d == 0.0);
  }
  SECTION("separation truncated to the shorter orbit") {
    const auto r = sensitivity_experiment(0.3, 0.05, {.v0 = 3.5}, 300, 0.1);
    CHECK(r.separation.size() ==
          std::min(r.orbit_a.states.size(), r.orbit_b.states.size()));
  }
  CHECK_THROWS_AS(sensitivity_experiment(0.1, 0.95, {.v0 = 2.0}, 10, 0.1), DomainError);
  CHECK_THROWS_AS(sensitivity_experiment(0.1, 0.001, {.v0 = 2.0}, 10, 0.0), ArgumentError);
}

TEST_CASE("contraction holds on the congested half of the diagram", "[dynamics][property]") {
  // |f(k)| < v0 |k| exactly when ln(1/k) < 1, i.e. k > 1/e.
  const double v0 = GENERATE(0.25, 0.5, 0.9);
  for (int i = 1; i < 1000; ++i) {
    const double k = 1.0 / std::numbers::e + (1.0 - 1.0 / std::numbers::e) * i / 1000.0;
    CHECK(step(k, {.v0 = v0}).state.k < v0 * k);
  }
}

TEST_CASE("orbits below v0 = 1 settle on a positive sink, not on zero", "[dynamics]") {
  // Counterexample to a decay bound k_i <= k0 v0^i: the first step from
  // k0 = 0.1 already exceeds v0 k0 because ln(1/0.1) > 1.
  const Orbit o = iterate(0.1, {.v0 = 0.5}, 100);
  CHECK(o.states[1].k > 0.5 * 0.1);
  CHECK(o.states.back().k == Approx(std::exp(-2.0)).epsilon(1e-9));
}

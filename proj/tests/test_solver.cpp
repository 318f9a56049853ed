#include <doctest.h>

#include <cmath>

#include "singheat/kernel.hpp"
#include "singheat/solver.hpp"

using namespace singheat;

namespace {

GridSpec coarse(double t_min = 0.05, double ratio = 0.5) {
  GridSpec g;
  g.h = 0.04;
  g.t_min = t_min;
  g.ratio = ratio;
  return g;
}

const Measure kDelta = Measure::dirac(1, Point{});

}  // namespace

TEST_CASE("free evolution of a Dirac follows the kernel") {
  const GridSpec g = coarse();
  const auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0);
  CHECK(u.times.front() == doctest::Approx(g.t_min));
  CHECK(u.times.back() == doctest::Approx(1.0));
  const std::size_t j = u.times.size() - 1;
  for (double x : {0.0, 0.5, 1.5}) CHECK(u.at(j, Point{x}) == doctest::Approx(heat_kernel(Point{x}, 1.0, 1)).epsilon(2e-3));
  CHECK(u.mass(j) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(u.absorbed_mass(j) == 0.0);
}

TEST_CASE("space-independent absorption multiplies by exp(-int V)") {
  const GridSpec g = coarse();
  const auto V = Potential::time_power(1, 1.0, 0.5);
  const auto u = step_solve(V, g, kDelta, g.t_min, 1.0);
  CHECK(u.layer_exact);
  CHECK(u.layer_factor == doctest::Approx(std::exp(-2.0 * std::sqrt(g.t_min))));
  const std::size_t j = u.times.size() - 1;
  CHECK(u.at(j, Point{}) == doctest::Approx(std::exp(-2.0) * heat_kernel(Point{}, 1.0, 1)).epsilon(3e-3));
  // mass balance: what is left plus what was absorbed equals the starting mass
  CHECK(u.mass(j) + u.absorbed_mass(j) == doctest::Approx(u.mass(0)).epsilon(2e-3));
}

TEST_CASE("snapshots, interpolation and cell sums") {
  const GridSpec g = coarse();
  SolveOptions o;
  o.snapshots = {0.2, 0.5};
  const auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0, o);
  CHECK(u.snapshot(0.2) < u.snapshot(0.5));
  CHECK_THROWS_AS(u.snapshot(0.3), DomainError);
  CHECK(u.at(0, Point{100.0}) == 0.0);
  const std::vector<double> ones(u.node_count(), 1.0);
  CHECK(u.cell_sum(ones, Box::cube(1, -1.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("reflecting walls conserve mass") {
  GridSpec g = coarse();
  g.a = -1.0;
  g.b = 1.0;
  SolveOptions o;
  o.dirichlet = false;
  const auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0, o);
  CHECK(u.mass(u.times.size() - 1) == doctest::Approx(u.mass(0)).epsilon(1e-9));
}

TEST_CASE("sweeps are monotone and the comparison principle holds") {
  const GridSpec g = coarse(0.02, std::pow(2.0, -0.5));
  SweepOptions o;
  o.throw_on_violation = false;
  const auto V = Potential::hardy(1, 1.0, 0.5);
  const auto k = solve_level_truncation(V, kDelta, {1.0, 10.0, 100.0}, g, o);
  CHECK(k.monotone.ok);
  const auto d = solve_time_truncation(V, kDelta, {0.5, 0.1}, g, o);
  CHECK(d.monotone.ok);
  const auto r = solve_exhaustion(V, kDelta, {1.0, 2.0, 4.0}, g, o);
  CHECK(r.monotone.ok);
  for (const auto* s : {&k, &d, &r})
    for (const auto& f : s->members) CHECK(comparison_check(f, kDelta).ok);
  CHECK_THROWS_AS(solve_level_truncation(V, kDelta, {10.0, 1.0}, g, o), DomainError);
}

TEST_CASE("comparison check flags a field above the free evolution") {
  const GridSpec g = coarse();
  auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0);
  for (auto& v : u.values.back()) v *= 1.1;
  const auto c = comparison_check(u, kDelta);
  CHECK_FALSE(c.ok);
  CHECK_FALSE(c.witness.empty());
}

TEST_CASE("kernel estimates stay below the free kernel") {
  const GridSpec g = coarse();
  const double sigma = std::sqrt(2.0 * g.t_min);
  const auto e = kernel_estimate(Potential::time_power(1, 1.0, 0.5), Point{}, g, sigma);
  CHECK(e.max_ratio <= 1.0);
  CHECK(e.max_ratio > 0.5);
  CHECK_THROWS_AS(kernel_estimate(Potential::zero(1), Point{}, g, g.h), DomainError);
}

TEST_CASE("reduced measure of the zero datum and Duhamel identity for V = 0") {
  const GridSpec g = coarse(0.01, std::pow(2.0, -0.25));
  const auto z = reduce(Potential::time_power(1, 1.0, 0.5), Measure::zero(1), g, {10.0, 100.0});
  CHECK(z.m_star == 0.0);
  CHECK(z.verdict == Outcome::pass);
  const auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0);
  CHECK(duhamel_residual(u, Potential::zero(1), kDelta).residual <= 5e-3);
  CHECK(duhamel_residual(u, Potential::zero(1), kDelta.scaled(2.0)).residual == doctest::Approx(0.5).epsilon(0.02));
  // An explicit early-absorbed mass is spread like the source.
  CHECK(duhamel_residual(u, Potential::zero(1), kDelta.scaled(2.0), {}, {}, 1.0).residual <= 5e-3);
  CHECK(duhamel_residual(u, Potential::zero(1), kDelta, {}, {}, 0.0).residual <= 5e-3);
}

TEST_CASE("weighted estimates") {
  const GridSpec g = coarse(0.01, std::pow(2.0, -0.25));
  const auto e = weighted_estimate(Potential::zero(1), kDelta, g);
  CHECK(e.rhs == doctest::Approx(1.0));
  CHECK(e.ratio() <= 1.02);
  GridSpec b = g;
  b.a = -2.0;
  b.b = 2.0;
  const auto bd = bounded_domain_estimate(Potential::time_power(1, 1.0, 0.5), kDelta, b);
  CHECK(bd.rhs == doctest::Approx(2.0));
  CHECK(bd.lhs > 0.0);
}

#include <doctest.h>

#include <cmath>

#include "singheat/kernel.hpp"
#include "singheat/trace.hpp"

using namespace singheat;

namespace {

GridSpec trace_grid() {
  GridSpec g;
  g.a = -6.0;
  g.b = 6.0;
  g.h = 0.01;
  g.t_min = std::ldexp(1.0, -12);
  g.ratio = std::pow(2.0, -0.25);
  return g;
}

const Measure kDelta = Measure::dirac(1, Point{});

}  // namespace

TEST_CASE("free trace of two atoms") {
  const GridSpec g = trace_grid();
  const Measure mu(1, {{Point{0.0}, 1.0}, {Point{1.0}, 0.5}});
  const auto u = step_solve(Potential::zero(1), g, mu, g.t_min, 1.0);
  const auto tr = initial_trace(u, Potential::zero(1));
  CHECK(tr.count(CellClass::singular) == 0);
  CHECK(tr.count(CellClass::inconclusive) == 0);
  double m0 = 0.0, m1 = 0.0, rest = 0.0;
  for (const auto& c : tr.cells) {
    if (c.cell.contains(Point{0.0})) m0 = c.mass;
    else if (c.cell.contains(Point{1.0})) m1 = c.mass;
    else rest = std::max(rest, c.mass);
  }
  CHECK(m0 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m1 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(rest <= 1e-3);
  CHECK(tr.regular_measure(1).total_mass() == doctest::Approx(1.5).epsilon(0.02));
  CHECK(tr.singular_cells().empty());
}

TEST_CASE("trace needs a resolving start time") {
  GridSpec g = trace_grid();
  g.t_min = 0.05;
  const auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0);
  CHECK_THROWS_AS(initial_trace(u, Potential::zero(1)), DomainError);
}

TEST_CASE("trace of the zero solution is regular and empty") {
  const GridSpec g = trace_grid();
  const auto u = step_solve(Potential::zero(1), g, Measure::zero(1), g.t_min, 1.0);
  const auto tr = initial_trace(u, Potential::time_power(1, 0.5, 1.0));
  CHECK(tr.count(CellClass::regular) == tr.cells.size());
  CHECK(tr.regular_measure(1).total_mass() == 0.0);
}

TEST_CASE("Harnack constant for the kernel is finite") {
  GridSpec g;
  g.h = 0.04;
  g.t_min = 0.05;
  g.ratio = std::pow(2.0, -0.25);
  const auto u = step_solve(Potential::zero(1), g, kDelta, g.t_min, 1.0);
  HarnackOptions o;
  o.min_time_fraction = 0.1;
  const auto h = harnack_audit(u, 0.0, o);
  CHECK(h.finite());
  CHECK(h.pairs > 0);
  CHECK(h.constant <= 1.0);
}

TEST_CASE("representation envelope recovers the Gaussian for V = 0") {
  GridSpec g;
  g.h = 0.02;
  g.t_min = 0.05;
  g.ratio = std::pow(2.0, -0.25);
  const auto r = representation_check(Potential::zero(1), g);
  CHECK(r.c_fit == doctest::Approx(1.0 / std::sqrt(4.0 * kPi)).epsilon(0.05));
  CHECK(r.gamma_fit == doctest::Approx(0.25).epsilon(0.05));
  CHECK(r.envelope_ok);
  CHECK(r.held_out > 0);
}

TEST_CASE("cell measure counts closed boxes") {
  const Measure mu(1, {{Point{0.0}, 1.0}, {Point{0.5}, 2.0}});
  CHECK(cell_measure(mu, Box::cube(1, -0.25, 0.25)) == 1.0);
  CHECK(cell_measure(mu, Box::cube(1, 0.0, 0.5)) == 3.0);
}

TEST_CASE("sweep needs a singular set and supported candidates") {
  const GridSpec g = trace_grid();
  const auto V = Potential::time_power(1, 1.0, 0.5);
  const auto u = step_solve(V, g, kDelta, g.t_min, 1.0);
  const auto sw = sweep_trace(u, V, {kDelta}, {1e2, 1e3});
  CHECK(sw.empty_singular_set);
  CHECK(sw.candidates.empty());
}

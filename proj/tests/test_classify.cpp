#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "singheat/classify.hpp"
#include "singheat/kernel.hpp"

using namespace singheat;

namespace {
const auto kSqrt = Potential::time_power(1, 1.0, 0.5);
const auto kInv = Potential::time_power(1, 0.5, 1.0);
const Measure kDelta = Measure::dirac(1, Point{});
}  // namespace

TEST_CASE("admissibility integral against a reduced one-dimensional oracle") {
  // R = 2: int_0^1 t^-1/2 erf(1 / sqrt t) dt = int_0^1 2 erf(1 / s) ds
  const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double s) { return s > 0.0 ? 2.0 * std::erf(1.0 / s) : 2.0; }, 0.0, 1.0, 15, 1e-14);
  const auto rep = admissibility(kSqrt, kDelta, 2.0, 1.0);
  CHECK(rep.verdict == Outcome::pass);
  CHECK(rep.constant("M_R") == doctest::Approx(oracle).epsilon(1e-6));
  REQUIRE_FALSE(rep.probes.empty());
  CHECK_FALSE(rep.probes[0].trail.values.empty());
}

TEST_CASE("Dirac data is not admissible for c/t") {
  const auto rep = admissibility(kInv, kDelta, 1.0, 1.0);
  CHECK(rep.verdict == Outcome::divergent);
  CHECK(rep.note.find("not admissible") != std::string::npos);
  CHECK(std::isinf(rep.probes[0].value));
}

TEST_CASE("report constants") {
  ClassificationReport rep;
  rep.set("a", 1.5);
  rep.set("a", 2.5);
  CHECK(rep.has("a"));
  CHECK(rep.constant("a") == 2.5);
  CHECK_THROWS_AS(rep.constant("b"), DomainError);
}

TEST_CASE("subcritical constant includes the Gaussian weight") {
  const auto rep = subcritical_check(kSqrt, 1.0, 1.0, {Point{0.0}, Point{2.0}});
  CHECK(rep.verdict == Outcome::pass);
  double best = 0.0;
  for (const auto& p : rep.probes) best = std::max(best, p.weighted);
  CHECK(rep.constant("m_R") == doctest::Approx(best));
  CHECK(rep.probes[1].weighted == doctest::Approx(rep.probes[1].value * std::exp(1.0)));
}

TEST_CASE("strong subcriticality: closed-form scaling and deterministic spot checks") {
  const std::vector<double> lambdas{1e-1, 1e-2, 1e-3, 1e-4};
  StrongSubcriticalOptions o;
  const auto a = strong_subcritical_sufficient(kSqrt, 1.0, {Point{0.0}}, lambdas, o);
  const auto b = strong_subcritical_sufficient(kSqrt, 1.0, {Point{0.0}}, lambdas, o);
  CHECK(a.verdict == Outcome::pass);
  CHECK(a.probes[0].trail.values.back() == doctest::Approx(4.0 * std::pow(1e-4, 1.5)).epsilon(1e-9));
  REQUIRE(a.constants.size() == b.constants.size());
  for (std::size_t i = 0; i < a.constants.size(); ++i) CHECK(a.constants[i].second == b.constants[i].second);
  CHECK(strong_subcritical_sufficient(kInv, 1.0, {Point{0.0}}, lambdas).verdict == Outcome::fail);
}

TEST_CASE("accumulated absorption") {
  CHECK(psi(kInv, Point{}, 0.01, 1.0) == doctest::Approx(0.5 * std::log(100.0)).epsilon(1e-12));
  CHECK(psi(kSqrt, Point{3.0}, 0.25, 1.0) == doctest::Approx(2.0 * (1.0 - 0.5)).epsilon(1e-9));
  const auto f = pole_criterion(kInv, Point{}, 1.0);
  CHECK(f.verdict == Singularity::singular);
  CHECK(f.trail.values.size() >= 3);
  CHECK(pole_criterion(Potential::time_power(1, 1.0, 0.9), Point{}, 1.0).verdict == Singularity::not_singular);
}

TEST_CASE("singular scan marks the Hardy pole") {
  const auto rep = singular_scan(Potential::hardy(3, 1.0, 2.0), 1.0, {Point{0, 0, 0}, Point{1, 0, 0}});
  CHECK(rep.probes[0].verdict == Verdict::divergent);
  CHECK(rep.probes[1].verdict == Verdict::converged);
  CHECK(rep.constant("singular_probes") == 1.0);
}

TEST_CASE("capacity of compact samples") {
  const auto rep = capacity_compact(kSqrt, 1.0, {Point{0.0}, Point{2.0}});
  CHECK(rep.constant("capacity") == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(capacity_compact(kInv, 1.0, {Point{0.0}}).constant("capacity") == 0.0);
  const auto dual = capacity_dual_check(kSqrt, 1.0, {Point{0.0}}, {{"wide", Box::cube(1, -50.0, 50.0), 1.0}});
  CHECK(dual.constant("best_bound") >= 0.5);
  CHECK(dual.constant("best_bound") <= 0.51);
  CHECK(default_lambda_sweep().size() == 4501);
}

TEST_CASE("torsion weight on an interval") {
  GridSpec g;
  g.a = -1.0;
  g.b = 1.0;
  g.h = 0.05;
  const auto w = torsion_function(g);
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double x = g.node(i)[0];
    CHECK(w.values[i] == doctest::Approx(0.5 * (1.0 - x * x)).epsilon(1e-9));
  }
}

#include <doctest.h>

#include <cmath>

#include "singheat/grid.hpp"
#include "singheat/potentials.hpp"
#include "test_support.hpp"

using namespace singheat;

TEST_CASE("catalog values") {
  CHECK(Potential::time_power(1, 0.5, 1.0).eval(Point{3.0}, 0.25) == doctest::Approx(2.0));
  CHECK(Potential::hardy(3, 2.0, 2.0).eval(Point{0.0, 2.0, 0.0}, 1.0) == doctest::Approx(0.5));
  CHECK(std::isinf(Potential::hardy(3, 1.0, 2.0).eval(Point{}, 1.0)));
  CHECK(Potential::product(1, 1.0, 0.5, 1.0).eval(Point{2.0}, 0.25) == doctest::Approx(1.0));
  const auto bump = Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0));
  CHECK(bump.eval(Point{0.5}, 0.1) == 3.0);
  CHECK(bump.eval(Point{1.5}, 0.1) == 0.0);
  CHECK(Potential::zero(2).is_zero());
  CHECK_THROWS_AS(Potential::zero(1).eval(Point{}, 0.0), DomainError);
}

TEST_CASE("level caps and time cuts compose") {
  const auto V = Potential::time_power(1, 1.0, 1.0);
  const auto capped = V.level_truncate(10.0).level_truncate(100.0);
  CHECK(capped.cap() == 10.0);
  CHECK(capped.eval(Point{}, 0.01) == 10.0);
  CHECK(capped.eval(Point{}, 0.5) == doctest::Approx(2.0));
  const auto cut = V.time_truncate(0.1).time_truncate(0.2);
  CHECK(cut.cut() == 0.2);
  CHECK(cut.eval(Point{}, 0.15) == 0.0);
  CHECK(cut.eval(Point{}, 0.5) == doctest::Approx(2.0));
  CHECK_FALSE(V.level_truncate(5.0).singular_at_t0());
  CHECK(V.singular_at_t0());
}

TEST_CASE("exact time integrals") {
  const auto V = Potential::time_power(1, 1.0, 0.5);
  CHECK(V.time_integral(0.0, 0.25) == doctest::Approx(1.0));
  CHECK(std::isinf(Potential::time_power(1, 0.5, 1.0).time_integral(0.0, 1.0)));
  CHECK(Potential::time_power(1, 0.5, 1.0).time_integral(0.1, 1.0) == doctest::Approx(0.5 * std::log(10.0)));
  // min{c/t, k}: k up to c/k, then c/t.
  const auto capped = Potential::time_power(1, 0.5, 1.0).level_truncate(100.0);
  CHECK(capped.time_integral(0.0, 0.01) == doctest::Approx(0.5 + 0.5 * std::log(0.01 * 100.0 / 0.5)));
}

TEST_CASE("C1 bounds") {
  CHECK(Potential::time_power(1, 0.7, 1.0).c1_bound(1.0).value() == doctest::Approx(0.7));
  CHECK(Potential::time_power(1, 1.0, 0.5).c1_bound(4.0).value() == doctest::Approx(2.0));
  CHECK_FALSE(Potential::hardy(1, 1.0, 1.0).c1_bound(1.0).has_value());
}

TEST_CASE("text specs") {
  CHECK(Potential::parse("time_power(c=0.5, beta=1)", 1).eval(Point{}, 0.5) == doctest::Approx(1.0));
  CHECK(Potential::parse("zero", 2).is_zero());
  CHECK(Potential::parse("bounded_bump(c=2, lo=-1, hi=1)", 2).eval(Point{0.5, -0.5}, 1.0) == 2.0);
  CHECK_THROWS_AS(Potential::parse("time_power(c=0.5)", 1), ConfigError);
  CHECK_THROWS_AS(Potential::parse("time_power(c=0.5, beta=1, gamma=2)", 1), ConfigError);
  CHECK_THROWS_AS(Potential::parse("nonsense(c=1)", 1), ConfigError);
  CHECK_THROWS_AS(Potential::parse("hardy(c=-1, gamma=1)", 1), ConfigError);
  CHECK_THROWS_AS(Potential::parse("hardy(c=x, gamma=1)", 1), ConfigError);
}

TEST_CASE("tabulated potentials interpolate, vanish outside the hull and clamp in time") {
  testing_support::TempDir dir("potentials");
  const auto path = dir.file("v.csv", "x,t,value\n0,0.5,1\n0,1,2\n1,0.5,3\n1,1,4\n");
  const auto V = Potential::parse("custom(file=" + path + ")", 1);
  CHECK(V.eval(Point{0.5}, 0.75) == doctest::Approx(2.5));
  CHECK(V.eval(Point{2.0}, 0.75) == 0.0);
  CHECK(V.eval(Point{0.0}, 0.1) == doctest::Approx(1.0));
  CHECK(V.eval(Point{1.0}, 5.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(Potential::parse("custom(file=" + (dir.path / "none.csv").string() + ")", 1), ConfigError);
}

TEST_CASE("grid nodes and time sequence") {
  GridSpec g;
  g.a = -1.0;
  g.b = 1.0;
  g.h = 0.5;
  g.t_min = 0.1;
  g.ratio = 0.5;
  g.validate();
  CHECK(g.node_count() == 5);
  CHECK(g.node(4)[0] == doctest::Approx(1.0));
  const auto ts = g.time_nodes();
  CHECK(ts.front() == doctest::Approx(0.1));
  CHECK(ts.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
  CHECK(g.with_half_width(0.5).node_count() == 3);
  GridSpec bad = g;
  bad.h = 0.3;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = g;
  bad.t_min = 2.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

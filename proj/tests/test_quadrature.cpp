#include <doctest.h>

#include <cmath>
#include <vector>

#include "singheat/quadrature.hpp"

using namespace singheat;

TEST_CASE("Gauss rules integrate polynomials of degree 2n - 1 exactly") {
  for (int n : {2, 3, 4, 5, 6, 8, 10, 12, 16, 20}) {
    const auto& r = gauss_rule(n);
    double s = 0.0, w = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      s += r.w[i] * std::pow(r.x[i], 2 * n - 2);
      w += r.w[i];
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(s == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-12));
  }
  CHECK_THROWS(gauss_rule(7));
}

TEST_CASE("graded cubature handles an integrable point singularity") {
  // int_{[-1,1]^2} |x|^-1 dx = 8 asinh(1)
  const Focus f{Point{}, 1e-9};
  const double v = cubature([](const Point& x) {
    const double r = std::hypot(x[0], x[1]);
    return r > 0 ? 1.0 / r : 0.0;
  }, Box::cube(2, -1.0, 1.0), std::span<const Focus>(&f, 1));
  CHECK(v == doctest::Approx(8.0 * std::asinh(1.0)).epsilon(1e-6));
}

TEST_CASE("time refinement: convergent, divergent and slow integrands") {
  const auto conv = time_refinement([](double t) { return 1.0 / std::sqrt(t); }, 1.0);
  CHECK(conv.converged());
  CHECK(conv.value == doctest::Approx(2.0).epsilon(1e-6));
  const auto div = time_refinement([](double t) { return 1.0 / t; }, 1.0);
  CHECK(div.divergent());
  CHECK(std::isinf(div.value));
  const auto hard = time_refinement([](double t) { return 1.0 / (t * std::pow(std::log(t / 2.0), 2)); }, 1.0);
  CHECK_FALSE(hard.divergent());
  // every trail keeps its evidence
  CHECK(conv.levels.size() == conv.values.size());
  CHECK(conv.gaps.size() == conv.values.size());
}

TEST_CASE("sequence judge") {
  TrailOptions o;
  o.min_levels = 5;
  std::vector<double> geometric, harmonic;
  double s = 0.0;
  for (int l = 0; l < 24; ++l) {
    s += std::pow(0.5, l);
    geometric.push_back(s);
    harmonic.push_back(l * std::log(2.0));
  }
  double limit = 0.0, err = 0.0;
  CHECK(judge_sequence(geometric, o, &limit, &err) == Verdict::converged);
  CHECK(limit == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(judge_sequence(harmonic, o, &limit, &err) == Verdict::divergent);
  const std::vector<double> short_seq{1.0, 1.5, 1.75};
  CHECK(judge_sequence(short_seq, o, &limit, &err) == Verdict::inconclusive);
  std::vector<double> levels(harmonic.size());
  for (std::size_t l = 0; l < levels.size(); ++l) levels[l] = std::ldexp(1.0, -static_cast<int>(l));
  const auto tr = analyze_sequence(levels, harmonic, o);
  CHECK(tr.divergent());
}

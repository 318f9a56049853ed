#include "singheat/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <map>
#include <mutex>

#include "csv.hpp"

namespace singheat {

namespace {

template <unsigned N>
GaussRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  GaussRule rule;
  // boost stores the nonnegative half; for odd N the first abscissa is zero.
  for (std::size_t i = xs.size(); i-- > 0;) {
    if (xs[i] == 0.0) continue;
    rule.x.push_back(-xs[i]);
    rule.w.push_back(ws[i]);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rule.x.push_back(xs[i]);
    rule.w.push_back(ws[i]);
  }
  return rule;
}

struct CubatureDefaults {
  int order;
  double kappa;
};

constexpr CubatureDefaults kDefaults[kMaxDim] = {{8, 0.25}, {6, 0.35}, {4, 0.5}};

}  // namespace

const GaussRule& gauss_rule(int order) {
  static const std::map<int, GaussRule> rules = {
      {2, make_rule<2>()},   {3, make_rule<3>()},   {4, make_rule<4>()},   {5, make_rule<5>()},
      {6, make_rule<6>()},   {8, make_rule<8>()},   {10, make_rule<10>()}, {12, make_rule<12>()},
      {16, make_rule<16>()}, {20, make_rule<20>()},
  };
  auto it = rules.find(order);
  if (it == rules.end()) throw DomainError("unsupported Gauss-Legendre order " + std::to_string(order));
  return it->second;
}

double cubature(const std::function<double(const Point&)>& f, const Box& box,
                std::span<const Focus> foci, const CubatureOptions& opts) {
  const int n = box.dim;
  check_dim(n);
  if (box.empty()) return 0.0;
  const int order = opts.order > 0 ? opts.order : kDefaults[n - 1].order;
  const double kappa = opts.kappa > 0.0 ? opts.kappa : kDefaults[n - 1].kappa;
  const GaussRule& rule = gauss_rule(order);
  const std::size_t m = rule.x.size();

  struct Cell {
    Box box;
    int depth;
  };
  std::vector<Cell> stack{{box, 0}};
  double total = 0.0;
  std::array<std::size_t, kMaxDim> idx{};
  while (!stack.empty()) {
    const Cell cell = stack.back();
    stack.pop_back();
    double diam = 0.0;
    for (int k = 0; k < n; ++k) diam = std::max(diam, cell.box.hi[k] - cell.box.lo[k]);
    bool refine = false;
    if (cell.depth < opts.max_depth) {
      for (const auto& fc : foci) {
        const double d = std::sqrt(cell.box.dist2_to(fc.center));
        if (diam > kappa * std::max(d, fc.scale)) {
          refine = true;
          break;
        }
      }
    }
    if (refine) {
      for (unsigned child = 0; child < (1u << n); ++child) {
        Box c = cell.box;
        for (int k = 0; k < n; ++k) {
          const double mid = 0.5 * (cell.box.lo[k] + cell.box.hi[k]);
          if ((child >> k) & 1u) c.lo[k] = mid;
          else c.hi[k] = mid;
        }
        stack.push_back({c, cell.depth + 1});
      }
      continue;
    }
    std::array<double, kMaxDim> half{}, mid{};
    for (int k = 0; k < n; ++k) {
      half[k] = 0.5 * (cell.box.hi[k] - cell.box.lo[k]);
      mid[k] = 0.5 * (cell.box.hi[k] + cell.box.lo[k]);
    }
    double jac = 1.0;
    for (int k = 0; k < n; ++k) jac *= half[k];
    std::size_t npts = 1;
    for (int k = 0; k < n; ++k) npts *= m;
    double acc = 0.0;
    Point p{};
    for (std::size_t q = 0; q < npts; ++q) {
      std::size_t r = q;
      double w = 1.0;
      for (int k = 0; k < n; ++k) {
        idx[k] = r % m;
        r /= m;
        p[k] = mid[k] + half[k] * rule.x[idx[k]];
        w *= rule.w[idx[k]];
      }
      acc += w * f(p);
    }
    total += jac * acc;
  }
  return total;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::divergent: return "divergent";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void QuadratureTrail::write_csv(const std::string& path) const {
  csv::Writer w(path);
  w.header({"level", "value", "gap", "verdict"});
  for (std::size_t i = 0; i < values.size(); ++i) w.row(levels[i], values[i], gaps[i], std::string("-"));
  w.row(0.0, value, error_estimate, to_string(verdict));
}

Verdict judge_sequence(std::span<const double> values, const TrailOptions& opts, double* limit,
                       double* error) {
  const std::size_t L = values.size();
  for (double v : values) {
    if (std::isnan(v)) throw NumericalError("NaN in quadrature trail");
    if (std::isinf(v)) {
      if (limit) *limit = kInfinity;
      if (error) *error = kInfinity;
      return Verdict::divergent;
    }
  }
  if (L < static_cast<std::size_t>(std::max(opts.min_levels, 4))) return Verdict::inconclusive;

  auto gap = [&](std::size_t l) { return l == 0 ? values[0] : values[l] - values[l - 1]; };

  bool increasing = true;
  for (std::size_t l = 0; l < L; ++l)
    if (gap(l) < 0.0) increasing = false;
  if (increasing) {
    bool divergent = true;
    for (std::size_t l = L - 3; l < L && divergent; ++l) {
      const double g = gap(l);
      const double gp = gap(l - 1);
      // Slab contributions that stop shrinking cannot sum to a finite value, however small they
      // are relative to the partial sum (logarithmic growth).
      const bool flat = gp > 0.0 && g / gp >= 1.0 - 1e-6;
      if (!(gp > 0.0) || g / gp < opts.q_div || !(flat || g > opts.eta * std::abs(values[l]))) divergent = false;
    }
    if (divergent) {
      if (limit) *limit = kInfinity;
      if (error) *error = kInfinity;
      return Verdict::divergent;
    }
  }

  // Geometric (Aitken) tail for the slab contributions.
  auto accelerated = [&](std::size_t l) {
    const double g = gap(l);
    const double gp = gap(l - 1);
    if (gp != 0.0) {
      const double q = g / gp;
      if (q >= 0.0 && q < opts.q_div) return values[l] + g * q / (1.0 - q);
    }
    return values[l];
  };
  const double a2 = accelerated(L - 1);
  const double a1 = accelerated(L - 2);
  const double a0 = accelerated(L - 3);
  const bool last = std::abs(a2 - a1) <= opts.rel_tol * std::abs(a2) + opts.abs_tol;
  const bool prev = std::abs(a1 - a0) <= opts.rel_tol * std::abs(a1) + opts.abs_tol;
  if (last && prev) {
    if (limit) *limit = a2;
    if (error) *error = std::abs(a2 - a1) + std::abs(a1 - a0) + opts.abs_tol;
    return Verdict::converged;
  }
  return Verdict::inconclusive;
}

QuadratureTrail time_refinement(const std::function<double(double)>& g, double T, const TrailOptions& opts) {
  if (!(T > 0.0)) throw DomainError("time_refinement: horizon must be > 0");
  if (!(opts.ratio > 0.0 && opts.ratio < 1.0)) throw DomainError("time_refinement: ratio must lie in (0, 1)");
  const GaussRule& rule = gauss_rule(opts.time_order);
  QuadratureTrail trail;
  double upper = T;
  double total = 0.0;
  for (int l = 1; l <= opts.max_levels; ++l) {
    const double lower = upper * opts.ratio;
    // t = exp(u): int g(t) dt = int g(e^u) e^u du over [ln lower, ln upper].
    const double ua = std::log(lower), ub = std::log(upper);
    const double half = 0.5 * (ub - ua), mid = 0.5 * (ub + ua);
    double slab = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double t = std::exp(mid + half * rule.x[q]);
      const double v = g(t);
      if (std::isnan(v)) throw NumericalError("integrand returned NaN at t = " + format_double(t));
      slab += rule.w[q] * v * t;
    }
    slab *= half;
    total += slab;
    trail.levels.push_back(lower);
    trail.values.push_back(total);
    trail.gaps.push_back(slab);
    double limit = 0.0, err = 0.0;
    const Verdict v = judge_sequence(trail.values, opts, &limit, &err);
    if (v != Verdict::inconclusive) {
      trail.verdict = v;
      trail.value = limit;
      trail.error_estimate = err;
      return trail;
    }
    upper = lower;
  }
  trail.verdict = Verdict::inconclusive;
  trail.value = total;
  trail.error_estimate = kInfinity;
  return trail;
}

QuadratureTrail analyze_sequence(std::vector<double> levels, std::vector<double> values,
                                 const TrailOptions& opts) {
  if (levels.size() != values.size()) throw DomainError("analyze_sequence: size mismatch");
  QuadratureTrail trail;
  trail.levels = std::move(levels);
  trail.values = std::move(values);
  trail.gaps.resize(trail.values.size());
  for (std::size_t i = 0; i < trail.values.size(); ++i)
    trail.gaps[i] = i == 0 ? trail.values[0] : trail.values[i] - trail.values[i - 1];
  double limit = 0.0, err = kInfinity;
  // The whole sequence is available, so judge it once: an early prefix can look divergent
  // while the integrand is still building up.
  trail.verdict = judge_sequence(trail.values, opts, &limit, &err);
  trail.value = trail.verdict == Verdict::inconclusive ? (trail.values.empty() ? 0.0 : trail.values.back()) : limit;
  trail.error_estimate = trail.verdict == Verdict::inconclusive ? kInfinity : err;
  return trail;
}

}  // namespace singheat

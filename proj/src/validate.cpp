#include "singheat/validate.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "singheat/classify.hpp"
#include "singheat/kernel.hpp"
#include "singheat/solver.hpp"
#include "singheat/trace.hpp"

namespace singheat {

namespace {

class Suite {
 public:
  explicit Suite(const std::function<void(const OracleResult&)>& progress) : progress_(progress) {}

  void module(std::string name) { module_ = std::move(name); }

  /// |value - expected| <= tol
  void near(const std::string& name, double value, double expected, double tol, std::string detail = {}) {
    add(name, value, expected, tol, std::abs(value - expected) <= tol, std::move(detail));
  }
  /// value <= bound
  void below(const std::string& name, double value, double bound, std::string detail = {}) {
    add(name, value, bound, 0.0, value <= bound, std::move(detail));
  }
  void check(const std::string& name, bool ok, std::string detail = {}) {
    add(name, ok ? 1.0 : 0.0, 1.0, 0.0, ok, std::move(detail));
  }

  /// Runs body; an escaped exception becomes a failed check.
  template <class F>
  void guarded(const std::string& name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, 0.0, 0.0, 0.0, false, std::string("exception: ") + e.what());
    }
  }

  std::vector<OracleResult> results;

 private:
  void add(const std::string& name, double value, double expected, double tol, bool ok, std::string detail) {
    results.push_back({module_, name, value, expected, tol, ok, std::move(detail)});
    if (progress_) progress_(results.back());
  }

  const std::function<void(const OracleResult&)>& progress_;
  std::string module_;
};

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

Density uniform_density(double lo, double hi, double h) {
  Density d;
  d.dim = 1;
  d.lo = {lo, 0.0, 0.0};
  d.h = h;
  d.count = {static_cast<std::size_t>(std::llround((hi - lo) / h)), 1, 1};
  d.values.assign(d.count[0], 1.0);
  return d;
}

GridSpec line_grid(double h, double t_min, double ratio) {
  GridSpec g;
  g.dim = 1;
  g.a = -8.0;
  g.b = 8.0;
  g.h = h;
  g.T = 1.0;
  g.t_min = t_min;
  g.ratio = ratio;
  return g;
}

/// t0^-e H(., t0) on the nodes: the exact profile of t^-e H[delta_0] at the start time.
std::vector<double> power_profile(const GridSpec& g, double t0, double e) {
  std::vector<double> v(g.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(t0, -e) * heat_kernel(g.node(i), t0, g.dim);
  return v;
}

/// max_i |u_i - H(x_i, t)| / max_i H(x_i, t)
double max_error_vs_kernel(const Field& f, std::size_t snap, double t, double scale) {
  double err = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < f.node_count(); ++i) {
    const double H = scale * heat_kernel(f.grid.node(i), t, f.grid.dim);
    err = std::max(err, std::abs(f.values[snap][i] - H));
    sup = std::max(sup, H);
  }
  return err / sup;
}

std::size_t origin_node(const GridSpec& g) { return static_cast<std::size_t>(std::llround(-g.a / g.h)); }

void measures_checks(Suite& s) {
  s.module("measures");
  const Measure uniform(1, {}, uniform_density(-1.0, 1.0, 2e-4));
  const double oracle = simpson([](double y) { return std::exp(-y * y / 4.0); }, -1.0, 1.0, 20000);
  s.near("weighted norm of the unit density on [-1,1]", mT_norm(uniform, 1.0), oracle, 1e-8, "Simpson oracle");
  const Measure wide(1, {}, uniform_density(-2.0, 2.0, 0.01));
  s.near("restriction halves the mass of a density", wide.restrict(Box::cube(1, -1.0, 1.0)).total_mass(), 2.0, 1e-12);
  s.near("weighted norm of an atom at distance 2", mT_norm(Measure::dirac(1, Point{2.0}), 1.0), std::exp(-1.0), 1e-15);
}

void kernel_checks(Suite& s) {
  s.module("kernel_engine");
  double worst = 0.0;
  for (double x : {0.0, 0.3, 1.1, 2.5}) {
    const double conv = simpson(
        [&](double y) { return heat_kernel(Point{x - y}, 0.1, 1) * heat_kernel(Point{y}, 0.2, 1); }, -10.0, 10.0,
        8000);
    worst = std::max(worst, std::abs(conv - heat_kernel(Point{x}, 0.3, 1)));
  }
  s.below("semigroup property of the kernel", worst, 1e-6, "Simpson convolution");

  const Measure uniform(1, {}, uniform_density(-1.0, 1.0, 2e-4));
  const double oracle =
      simpson([](double y) { return heat_kernel(Point{y}, 0.25, 1); }, -1.0, 1.0, 20000);
  s.near("heat potential of the unit density at (0, 1/4)", heat_potential(uniform, Point{}, 0.25), oracle, 1e-8,
         "Simpson oracle");

  TrailOptions trail;
  const Box box = Box::cube(1, -8.0, 8.0);
  SpaceTimeIntegrand half;
  half.f = [](const Point& x, double t) { return heat_kernel(x, t, 1) / std::sqrt(t); };
  half.foci = [](double t) { return std::vector<Focus>{{Point{}, std::sqrt(t)}}; };
  const auto tr = spacetime_integral(half, box, 1.0, trail);
  s.check("kernel times t^-1/2 integrates to a converged value", tr.converged(), to_string(tr.verdict));
  s.near("kernel times t^-1/2 integrates to 2", tr.value, 2.0, 1e-4);
  SpaceTimeIntegrand inv = half;
  inv.f = [](const Point& x, double t) { return heat_kernel(x, t, 1) / t; };
  s.check("kernel times 1/t diverges", spacetime_integral(inv, box, 1.0, trail).divergent());
}

void classify_checks(Suite& s) {
  s.module("classify");
  const auto sqrt_pot = Potential::time_power(1, 1.0, 0.5);
  const auto inv_pot = Potential::time_power(1, 0.5, 1.0);
  const auto bump = Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0));
  const Measure delta = Measure::dirac(1, Point{});

  // int_0^1 t^-1/2 erf(1 / (2 sqrt t)) dt with t = s^2.
  const double adm_oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double r) { return r > 0.0 ? 2.0 * std::erf(1.0 / (2.0 * r)) : 2.0; }, 0.0, 1.0, 15, 1e-14);
  const auto adm = admissibility(sqrt_pot, delta, 1.0, 1.0);
  s.near("admissibility integral for t^-1/2 and a Dirac", adm.constant("M_R"), adm_oracle, 1e-6 * adm_oracle,
         "one-dimensional reduced quadrature");
  s.check("a Dirac is not admissible for c/t", admissibility(inv_pot, delta, 1.0, 1.0).verdict == Outcome::divergent);
  s.near("admissibility of the zero measure", admissibility(sqrt_pot, Measure::zero(1), 1.0, 1.0).constant("M_R"),
         0.0, 0.0);

  std::vector<Point> coarse, fine;
  for (int i = -4; i <= 4; ++i) coarse.push_back(Point{0.5 * i});
  for (int i = -8; i <= 8; ++i) fine.push_back(Point{0.25 * i});
  const auto sub1 = subcritical_check(sqrt_pot, 1.0, 1.0, coarse);
  const auto sub2 = subcritical_check(sqrt_pot, 1.0, 1.0, fine);
  s.check("t^-1/2 is subcritical", sub1.verdict == Outcome::pass && sub2.verdict == Outcome::pass);
  s.near("subcritical constant stable at doubled probe density", sub2.constant("m_R") / sub1.constant("m_R"), 1.0,
         0.01);
  s.check("c/t is not subcritical", subcritical_check(inv_pot, 1.0, 1.0, {Point{0.25}}).verdict == Outcome::fail);
  s.near("zero potential has subcritical constant 0",
         subcritical_check(Potential::zero(1), 1.0, 1.0, coarse).constant("m_R"), 0.0, 0.0);

  const std::vector<double> lambdas{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  const std::vector<Point> few{Point{0.0}, Point{0.5}};
  const auto ss1 = strong_subcritical_sufficient(sqrt_pot, 1.0, few, lambdas);
  s.check("t^-1/2 meets the strong subcriticality sufficient condition", ss1.verdict == Outcome::pass);
  {
    // Closed form: e^{y^2/4} lambda^-1 (2 lambda^2) 2 sqrt(lambda) = 4 e^{y^2/4} lambda^{3/2}
    const auto& tr = ss1.probes[0].trail;
    const double lam = lambdas.back();
    s.near("scaled local integral follows lambda^(3/2)", tr.values.back(), 4.0 * std::pow(lam, 1.5),
           1e-9 * 4.0 * std::pow(lam, 1.5));
  }
  s.check("c/t fails the strong subcriticality condition",
          strong_subcritical_sufficient(inv_pot, 1.0, few, lambdas).verdict == Outcome::fail);
  s.check("a bounded bump meets the strong subcriticality condition",
          strong_subcritical_sufficient(bump, 1.0, few, lambdas).verdict == Outcome::pass);

  s.near("accumulated absorption for c/t equals c ln(T/t)", psi(inv_pot, Point{}, 0.1, 1.0), 0.5 * std::log(10.0),
         1e-12);
  s.near("accumulated absorption vanishes for V = 0", psi(Potential::zero(1), Point{}, 0.1, 1.0), 0.0, 0.0);
  s.below("accumulated absorption of the bump is at most c (T - t)", psi(bump, Point{0.5}, 0.1, 1.0), 3.0 * 0.9);
  s.check("Dirac pole is singular for c/t", pole_criterion(inv_pot, Point{}, 1.0).verdict == Singularity::singular);
  s.check("no singular pole for t^-1/2",
          pole_criterion(sqrt_pot, Point{}, 1.0).verdict == Singularity::not_singular);
  s.check("no singular pole for V = 0",
          pole_criterion(Potential::zero(1), Point{}, 1.0).verdict == Singularity::not_singular);

  const auto hardy2 = singular_scan(Potential::hardy(3, 1.0, 2.0), 1.0, {Point{0, 0, 0}, Point{1, 0, 0}});
  s.check("inverse-square potential: origin divergent with local confirmation",
          hardy2.probes[0].verdict == Verdict::divergent && hardy2.constant("local_check_failures") == 0.0);
  s.check("inverse-square potential: unit sphere point converges", hardy2.probes[1].verdict == Verdict::converged);
  const auto hardy1 = singular_scan(Potential::hardy(3, 1.0, 1.0), 1.0, {Point{0, 0, 0}, Point{1, 0, 0}});
  s.near("inverse-power potential below the critical exponent: no singular probes",
         hardy1.constant("singular_probes"), 0.0, 0.0);
  const auto inv_scan = singular_scan(inv_pot, 1.0, {Point{0.0}, Point{1.0}, Point{-2.5}});
  s.near("c/t: every probe singular", inv_scan.constant("singular_probes"), 3.0, 0.0);
  s.check("singular pole implies a divergent scan at the same point", inv_scan.probes[0].verdict == Verdict::divergent);

  const std::vector<Point> E{Point{0.0}, Point{1.0}, Point{-2.0}, Point{3.0}};
  s.near("capacity of compact sets for t^-1/2", capacity_compact(sqrt_pot, 1.0, E).constant("capacity"), 0.5, 1e-4);
  s.near("capacity vanishes on the singular set of c/t", capacity_compact(inv_pot, 1.0, E).constant("capacity"), 0.0,
         0.0);
  {
    const auto h = Potential::hardy(1, 1.0, 0.5);
    const double c1 = capacity_compact(h, 1.0, {Point{0.5}}).constant("capacity");
    const double c2 = capacity_compact(h, 1.0, {Point{0.5}, Point{0.05}}).constant("capacity");
    s.check("capacity decreases as the set grows", c1 >= c2);
  }
  const std::vector<TestFunction> family{{"constant on [-50,50]", Box::cube(1, -50.0, 50.0), 1.0}};
  const auto dual = capacity_dual_check(sqrt_pot, 1.0, {Point{0.0}, Point{1.0}}, family);
  s.check("dual certificate bounds the capacity from above", dual.constant("consistent") == 1.0);
  s.below("dual certificate for t^-1/2 is at most 0.51", dual.constant("best_bound"), 0.51);
  s.below("dual certificate for c/t tends to 0",
          capacity_dual_check(inv_pot, 1.0, {Point{0.0}}, family).constant("best_bound"), 1e-5);
  s.check("zero test function gives no certificate",
          capacity_dual_check(sqrt_pot, 1.0, {Point{0.0}}, {{"zero", Box::cube(1, -1.0, 1.0), 0.0}}).note ==
              "no certificate found");

  GridSpec g = line_grid(0.01, 0.05, 0.5);
  g.a = -1.0;
  g.b = 1.0;
  const auto w = torsion_function(g);
  double err = 0.0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double x = g.node(i)[0];
    err = std::max(err, std::abs(w.values[i] - 0.5 * (1.0 - x * x)));
  }
  s.below("torsion weight on (-1,1) matches (1 - x^2)/2", err, g.h * g.h);
}

void solver_checks(Suite& s) {
  s.module("solver");
  const Measure delta = Measure::dirac(1, Point{});
  const GridSpec g = line_grid(0.02, 0.05, 0.5);
  {
    const auto f = step_solve(Potential::zero(1), g, delta, 0.05, 1.0);
    s.below("free evolution reproduces the kernel", max_error_vs_kernel(f, f.times.size() - 1, 1.0, 1.0), 0.01);
  }
  {
    const double c = 0.5;
    const auto f = step_solve(Potential::time_power(1, c, 1.0), g, power_profile(g, 0.05, c), 0.05, 1.0);
    s.below("c/t solution t^-c H is reproduced", max_error_vs_kernel(f, f.times.size() - 1, 1.0, 1.0), 0.01);
  }
  {
    const double c = 0.5;
    const auto V = Potential::time_power(1, c, 1.0);
    GridSpec g2 = g;
    g2.t_min = 0.01;
    SolveOptions so;
    so.snapshots = {0.2};
    std::vector<double> lk, lf;
    double worst = 0.0;
    for (double k : {10.0, 100.0, 1000.0}) {
      const auto f = step_solve(V.level_truncate(k), g2, delta, 0.01, 1.0, so);
      const double factor = f.values[f.snapshot(0.2)][origin_node(g2)] / heat_kernel(Point{}, 0.2, 1);
      const double exact = std::exp(-c) * std::pow(k * 0.2 / c, -c);
      worst = std::max(worst, std::abs(factor / exact - 1.0));
      lk.push_back(std::log(k));
      lf.push_back(std::log(factor));
    }
    s.below("level truncation matches the exact absorption factor", worst, 0.02);
    const double slope = (lf.back() - lf.front()) / (lk.back() - lk.front());
    s.near("level truncation decays like k^-c", slope, -c, 0.1 * c);
  }
  {
    SweepOptions so;
    so.throw_on_violation = false;
    const auto V = Potential::time_power(1, 0.5, 1.0);
    GridSpec g3 = g;
    g3.t_min = 0.001;
    const auto kd = solve_level_truncation(V, delta, {1e2, 1e4, 1e6}, g3, so);
    const auto dd = solve_time_truncation(V, delta, {0.1, 1e-2, 1e-4}, g3, so);
    const double H = heat_kernel(Point{}, 1.0, 1);
    const std::size_t o = origin_node(g3);
    s.below("time and level truncation limits agree at (0, T)",
            std::abs(kd.members.back().values.back()[o] - dd.members.back().values.back()[o]) / H, 0.02,
            "relative to the free kernel");
    const auto free_cut = solve_time_truncation(V, delta, {2.0}, g, so);
    s.below("time cut beyond T is free evolution",
            max_error_vs_kernel(free_cut.members[0], free_cut.members[0].times.size() - 1, 1.0, 1.0), 0.01);
  }
  {
    SweepOptions so;
    so.throw_on_violation = false;
    const auto ex = solve_exhaustion(Potential::zero(1), delta, {2.0, 4.0, 8.0}, g, so);
    s.check("exhaustion increases with R for V = 0", ex.monotone.ok, ex.monotone.witness);
    const auto& last = ex.members.back();
    double gap = 0.0;
    for (std::size_t i = 0; i < last.node_count(); ++i)
      gap = std::max(gap, std::abs(last.values.back()[i] - heat_kernel(last.grid.node(i), 1.0, 1)));
    // The box cut costs e^-16; the remaining gap is the grid error of the free solve.
    s.below("exhaustion at R = 8 sqrt(T) reaches the free kernel", gap / heat_kernel(Point{}, 1.0, 1), 1e-4,
            "relative to the kernel peak");
    const auto ex2 = solve_exhaustion(Potential::time_power(1, 1.0, 0.5), delta, {2.0, 4.0, 8.0}, g, so);
    s.check("exhaustion increases with R for t^-1/2", ex2.monotone.ok, ex2.monotone.witness);
    const auto out = solve_exhaustion(Potential::zero(1), Measure::dirac(1, Point{3.0}), {2.0}, g, so);
    double sup = 0.0;
    for (const auto& snap : out.members[0].values)
      for (double v : snap) sup = std::max(sup, v);
    s.near("data outside the box gives the zero solution", sup, 0.0, 0.0);
  }
  {
    SweepOptions so;
    so.throw_on_violation = false;
    const GridSpec gm = line_grid(0.02, 0.01, std::pow(2.0, -0.25));
    const std::vector<Potential> catalog{Potential::zero(1),          Potential::time_power(1, 0.5, 1.0),
                                         Potential::time_power(1, 1.0, 0.5), Potential::hardy(1, 1.0, 0.5),
                                         Potential::product(1, 1.0, 0.5, 0.5),
                                         Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0))};
    bool mono = true, comp = true;
    std::string witness;
    for (const auto& V : catalog) {
      const auto a = solve_exhaustion(V, delta, {2.0, 4.0, 8.0}, gm, so);
      const auto b = solve_level_truncation(V, delta, {1.0, 10.0, 100.0, 1000.0}, gm, so);
      const auto c = solve_time_truncation(V, delta, {2.0, 0.5, 0.1, 0.02}, gm, so);
      for (const auto* r : {&a, &b, &c}) {
        if (!r->monotone.ok) {
          mono = false;
          witness = V.describe() + ": " + r->monotone.witness;
        }
        for (const auto& f : r->members)
          if (!comparison_check(f, delta).ok) comp = false;
      }
    }
    s.check("monotone sweeps for every catalog potential", mono, witness);
    s.check("comparison with the free evolution for every catalog potential", comp);
  }
  {
    const GridSpec gk = line_grid(0.02, 0.05, 0.5);
    const double sigma = std::sqrt(2.0 * gk.t_min);
    const auto k0 = kernel_estimate(Potential::zero(1), Point{}, gk, sigma);
    s.near("kernel estimate for V = 0 is the free kernel", k0.max_ratio, 1.0, 0.01);
    const auto kc = kernel_estimate(Potential::time_power(1, 0.5, 1.0), Point{}, gk, sigma, 1e6);
    s.below("kernel estimate for c/t vanishes", kc.max_ratio, 0.01);
    const double c = 0.5;
    const auto kb = kernel_estimate(Potential::bump(1, c, Box::cube(1, -1.0, 1.0)), Point{}, gk, sigma);
    double lo = kInfinity;
    const Field& f = kb.field;
    for (std::size_t j = 1; j < f.times.size(); ++j)
      for (std::size_t i = 0; i < f.node_count(); ++i) {
        const double H = heat_potential(Measure::dirac(1, Point{}), f.grid.node(i), f.times[j] + 0.5 * sigma * sigma -
                                                                                        f.times.front());
        if (H > 1e-3 * heat_kernel(Point{}, f.times[j] + 0.5 * sigma * sigma - f.times.front(), 1)) lo = std::min(lo, f.values[j][i] / (H * std::exp(-c * f.times[j])));
      }
    s.check("kernel estimate for a small bump lies in the absorption band", lo >= 0.99 && kb.max_ratio <= 1.01,
            "lower ratio " + format_double(lo) + ", upper ratio " + format_double(kb.max_ratio));
  }
  {
    const GridSpec gr = line_grid(0.02, 0.01, std::pow(2.0, -1.0 / 8));
    const std::vector<double> ks{1e2, 1e3, 1e4, 1e5, 1e6};
    const auto r0 = reduce(Potential::time_power(1, 0.5, 1.0), delta, gr, ks);
    s.near("reduced mass of a Dirac under c/t", r0.m_star, 0.0, 0.02);
    const auto r1 = reduce(Potential::time_power(1, 1.0, 0.5), delta, gr, ks);
    s.near("reduced mass of a Dirac under t^-1/2", r1.m_star, 1.0, 0.02);
    s.below("mass balance drift under t^-1/2", r1.drift, 0.02);
    s.near("reduced mass of the zero measure", reduce(Potential::time_power(1, 1.0, 0.5), Measure::zero(1), gr, ks).m_star,
           0.0, 0.0);

    const auto V = Potential::time_power(1, 1.0, 0.5);
    const auto u = step_solve(V, gr, delta, gr.t_min, 1.0);
    s.below("Duhamel identity for t^-1/2", duhamel_residual(u, V, delta).residual, 0.02);
    const auto u0 = step_solve(Potential::zero(1), gr, delta, gr.t_min, 1.0);
    s.below("Duhamel identity for V = 0", duhamel_residual(u0, Potential::zero(1), delta).residual, 1e-3);
    s.near("Duhamel residual detects a doubled mass", duhamel_residual(u0, Potential::zero(1), delta.scaled(2.0)).residual,
           0.5, 0.01, "relative to H[2 mu] the mismatch is 1/2");

    for (const auto& P : {Potential::time_power(1, 1.0, 0.5), Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0))}) {
      const auto e = weighted_estimate(P, delta, gr);
      s.below("weighted norm estimate for " + P.describe(), e.ratio(), 1.02);
    }
    GridSpec gb = gr;
    gb.a = -2.0;
    gb.b = 2.0;
    const auto b1 = bounded_domain_estimate(Potential::time_power(1, 1.0, 0.5), delta, gb);
    gb.h = 0.01;
    const auto b2 = bounded_domain_estimate(Potential::time_power(1, 1.0, 0.5), delta, gb);
    s.near("bounded-domain estimate stable under refinement", b2.lhs / b1.lhs, 1.0, 0.01,
           "finite: " + format_double(b1.lhs) + " vs " + format_double(b2.lhs));
  }
}

void trace_checks(Suite& s) {
  s.module("trace");
  const Measure delta = Measure::dirac(1, Point{});
  GridSpec gt;
  gt.dim = 1;
  gt.a = -6.0;
  gt.b = 6.0;
  gt.h = 0.005;
  gt.T = 1.0;
  gt.ratio = std::pow(2.0, -0.25);
  gt.t_min = std::ldexp(1.0, -14);
  const auto center_cell = [](const TraceReport& r) -> const CellRecord& {
    for (const auto& c : r.cells)
      if (c.center[0] == 0.0) return c;
    throw NumericalError("no cell at the origin");
  };
  {
    const auto V = Potential::time_power(1, 1.0, 0.5);
    const auto u = step_solve(V, gt, delta, gt.t_min, 1.0);
    const auto tr = initial_trace(u, V);
    s.near("t^-1/2: no singular cells", static_cast<double>(tr.count(CellClass::singular)), 0.0, 0.0);
    s.near("t^-1/2: no inconclusive cells", static_cast<double>(tr.count(CellClass::inconclusive)), 0.0, 0.0);
    s.near("t^-1/2: origin cell carries the unit atom", center_cell(tr).mass, 1.0, 0.02);
    double off = 0.0;
    for (const auto& c : tr.cells)
      if (c.center[0] != 0.0) off = std::max(off, c.mass);
    s.below("t^-1/2: other cells carry no mass", off, 1e-3);
    const auto lb = trace_lower_bound_check(u, tr, V);
    s.below("t^-1/2: solution from the trace matches u", lb.max_gap, 0.02);
  }
  {
    const double c = 0.5;
    const auto V = Potential::time_power(1, c, 1.0);
    auto u = step_solve(V, gt, power_profile(gt, gt.t_min, c), gt.t_min, 1.0);
    u.source = delta;
    const auto tr = initial_trace(u, V);
    const auto& o = center_cell(tr);
    s.check("c/t with t^-c H: origin cell singular with blow-up", o.cls == CellClass::singular && o.blowup);
    s.near("c/t with t^-c H: blow-up exponent", o.exponent, -c, 0.1 * c);
    const auto lb = trace_lower_bound_check(u, tr, V);
    s.check("c/t: u dominates the solution of its regular trace", lb.ok);
    const auto sw = sweep_trace(u, V, {delta.scaled(0.5), delta}, {1e2, 1e4, 1e6});
    double g = 0.0;
    for (const auto& cand : sw.candidates)
      for (double v : cand.gamma) g = std::max(g, v);
    s.near("c/t: swept trace of a Dirac candidate vanishes", g, 0.0, 0.02);
    s.check("swept traces are nested for nested candidates", sw.nested_monotone);
  }
  {
    const auto u = step_solve(Potential::zero(1), gt, Measure::zero(1), gt.t_min, 1.0);
    const auto tr = initial_trace(u, Potential::zero(1));
    s.near("zero solution: every cell regular", static_cast<double>(tr.count(CellClass::regular)),
           static_cast<double>(tr.cells.size()), 0.0);
  }
  {
    const GridSpec gh = line_grid(0.02, 0.05, std::pow(2.0, -0.25));
    GridSpec gh2 = gh;
    gh2.h = 0.01;
    HarnackOptions ho;
    ho.min_time_fraction = 0.1;
    std::vector<double> constants;
    for (double c : {0.0, 0.5, 1.0}) {
      const auto V = Potential::time_power(1, c, 1.0);
      const auto a = harnack_audit(step_solve(V, gh, power_profile(gh, gh.t_min, c), gh.t_min, 1.0), c, ho);
      const auto b = harnack_audit(step_solve(V, gh2, power_profile(gh2, gh2.t_min, c), gh2.t_min, 1.0), c, ho);
      s.near("Harnack constant grid-stable for t^-" + format_double(c) + " H", b.constant / a.constant, 1.0, 0.1);
      constants.push_back(a.constant);
    }
    s.below("Harnack constant of the free kernel is at most 1", constants[0], 1.0);
    s.check("Harnack constant grows with the exponent", constants[0] < constants[1] && constants[1] < constants[2]);
  }
  {
    const GridSpec gr = line_grid(0.02, 0.05, std::pow(2.0, -0.25));
    const auto r0 = representation_check(Potential::zero(1), gr);
    s.near("envelope exponent for V = 0", r0.gamma_fit, 0.25, 0.05 * 0.25);
    s.near("envelope constant for V = 0", r0.c_fit, 1.0 / std::sqrt(4.0 * kPi), 0.05 / std::sqrt(4.0 * kPi));
    const auto rb = representation_check(Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0)), gr);
    s.check("two-sided envelope for the bump", rb.envelope_ok && rb.c1 < rb.c2, rb.witness);
    for (double k : {10.0, 100.0}) {
      RepresentationOptions o;
      o.k = k;
      const auto rk = representation_check(Potential::time_power(1, 0.5, 1.0), gr, o);
      s.check("two-sided envelope for c/t capped at " + format_double(k), rk.envelope_ok, rk.witness);
    }
  }
  {
    const GridSpec gf = line_grid(0.01, std::ldexp(1.0, -12), std::pow(2.0, -0.25));
    const Measure two(1, {{Point{0.0}, 1.0}, {Point{1.0}, 0.5}});
    const auto u = step_solve(Potential::zero(1), gf, two, gf.t_min, 1.0);
    const auto tr = initial_trace(u, Potential::zero(1));
    double err = 0.0;
    for (const auto& c : tr.cells) err = std::max(err, std::abs(c.mass - cell_measure(two, c.cell)));
    s.below("free trace recovers atom masses cellwise", err, 0.02);
  }
}

}  // namespace

std::vector<OracleResult> run_oracle_suite(const std::function<void(const OracleResult&)>& progress) {
  Suite s(progress);
  s.guarded("measures", [&] { measures_checks(s); });
  s.guarded("kernel_engine", [&] { kernel_checks(s); });
  s.guarded("classify", [&] { classify_checks(s); });
  s.guarded("solver", [&] { solver_checks(s); });
  s.guarded("trace", [&] { trace_checks(s); });
  return std::move(s.results);
}

}  // namespace singheat

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any criterion fails.
// Usage: acceptance [criterion numbers...]   (default: all)
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include "singheat/classify.hpp"
#include "singheat/harness.hpp"
#include "singheat/kernel.hpp"
#include "singheat/solver.hpp"
#include "singheat/trace.hpp"

using namespace singheat;
namespace fs = std::filesystem;

namespace {

struct Finding {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

GridSpec line_grid(double h, double t_min, double ratio, double half = 8.0) {
  GridSpec g;
  g.a = -half;
  g.b = half;
  g.h = h;
  g.t_min = t_min;
  g.ratio = ratio;
  return g;
}

std::size_t origin(const GridSpec& g) { return static_cast<std::size_t>(std::lround(-g.a / g.h)); }

const Measure kDelta = Measure::dirac(1, Point{});

/// t0^-c H(., t0) on the nodes: the exact profile of t^-c H at the start time.
std::vector<double> power_profile(const GridSpec& g, double t0, double c) {
  std::vector<double> v(g.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(t0, -c) * heat_kernel(g.node(i), t0, 1);
  return v;
}

/// max_x |u(x, T) - f(x)| / sup f
double sup_error(const Field& u, const std::function<double(const Point&)>& f) {
  const std::size_t j = u.times.size() - 1;
  double err = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < u.node_count(); ++i) {
    const double e = f(u.grid.node(i));
    err = std::max(err, std::abs(u.values[j][i] - e));
    sup = std::max(sup, e);
  }
  return err / sup;
}

Finding free_kernel() {
  const GridSpec g;  // default grid
  const auto init = power_profile(g, 0.05, 0.0);
  const auto u = step_solve(Potential::zero(1), g, init, 0.05, 1.0);
  const double e = sup_error(u, [](const Point& x) { return heat_kernel(x, 1.0, 1); });
  return {e <= 0.01, "max |u - H| / sup H at T = 1: " + num(e) + " (limit 0.01)"};
}

Finding closed_form() {
  const double c = 0.5;
  const GridSpec g;
  const auto u = step_solve(Potential::time_power(1, c, 1.0), g, power_profile(g, 0.05, c), 0.05, 1.0);
  const double e = sup_error(u, [&](const Point& x) { return std::pow(1.0, -c) * heat_kernel(x, 1.0, 1); });
  return {e <= 0.01, "max |u - t^-c H| / sup at T = 1: " + num(e) + " (limit 0.01)"};
}

Finding level_truncation_law() {
  const double c = 0.5, t = 0.2;
  const auto V = Potential::time_power(1, c, 1.0);
  const GridSpec g = line_grid(0.02, 0.01, 0.5);
  SolveOptions so;
  so.snapshots = {t};
  bool ok = true;
  std::string detail;
  std::vector<double> lk, lf;
  for (double k : {10.0, 100.0, 1000.0}) {
    const auto u = step_solve(V.level_truncate(k), g, kDelta, g.t_min, 1.0, so);
    const double factor = u.values[u.snapshot(t)][origin(g)] / heat_kernel(Point{}, t, 1);
    const double law = std::exp(-c) * std::pow(k * t / c, -c);
    const double rel = std::abs(factor / law - 1.0);
    ok = ok && rel <= 0.02;
    detail += "k=" + num(k) + " rel " + num(rel) + "; ";
    lk.push_back(std::log(k));
    lf.push_back(std::log(factor));
  }
  // Least-squares slope of log factor against log k.
  const double mk = (lk[0] + lk[1] + lk[2]) / 3, mf = (lf[0] + lf[1] + lf[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lk[i] - mk) * (lf[i] - mf);
    sxx += (lk[i] - mk) * (lk[i] - mk);
  }
  const double slope = sxy / sxx;
  ok = ok && std::abs(slope + c) <= 0.1 * c;
  return {ok, detail + "decay exponent " + num(slope) + " (target " + num(-c) + " +- 10%)"};
}

Finding reduced_dichotomy() {
  const GridSpec g = line_grid(0.02, 0.01, std::pow(2.0, -1.0 / 8));
  const std::vector<double> ks{1e2, 1e3, 1e4, 1e5, 1e6};
  const auto a = reduce(Potential::time_power(1, 0.5, 1.0), kDelta, g, ks);
  const auto b = reduce(Potential::time_power(1, 1.0, 0.5), kDelta, g, ks);
  const bool ok = std::abs(a.m_star) <= 0.02 && std::abs(b.m_star - 1.0) <= 0.02 && a.drift <= 0.02 && b.drift <= 0.02;
  return {ok, "c/t: m* = " + num(a.m_star) + " (drift " + num(a.drift) + "); t^-1/2: m* = " + num(b.m_star) +
                  " (drift " + num(b.drift) + ")"};
}

Finding singular_set_scan() {
  const auto hardy = Potential::hardy(3, 1.0, 2.0);
  // Inner integral against the kernel: int H(x, t) |x|^-2 dx = 1 / (2t) in three dimensions.
  double inner = 0.0;
  for (double t : {0.5, 0.1, 0.01}) {
    const double v = potential_kernel_integral(hardy, Point{}, t, t, whole_space(3));
    inner = std::max(inner, std::abs(v * 2.0 * t - 1.0));
  }
  const auto r = singular_scan(hardy, 1.0, {Point{0, 0, 0}, Point{1, 0, 0}});
  const auto q = singular_scan(Potential::time_power(3, 1.0, 0.5), 1.0, {Point{0, 0, 0}, Point{1, 0, 0}});
  const bool ok = inner <= 1e-3 && r.probes[0].verdict == Verdict::divergent && r.probes[1].verdict == Verdict::converged &&
                  q.constant("singular_probes") == 0.0 && q.probes[0].verdict == Verdict::converged;
  return {ok, "|x|^-2: origin " + to_string(r.probes[0].verdict) + ", |x|=1 " + to_string(r.probes[1].verdict) +
                  ", inner-integral oracle error " + num(inner) + "; t^-1/2: " +
                  num(q.constant("singular_probes")) + " singular probes"};
}

Finding capacity() {
  const auto V = Potential::time_power(1, 1.0, 0.5);
  double worst = 0.0;
  const std::vector<std::vector<Point>> sets{{Point{0}}, {Point{0}, Point{1}}, {Point{-2}, Point{0.5}, Point{3}}};
  for (const auto& E : sets) worst = std::max(worst, std::abs(capacity_compact(V, 1.0, E).constant("capacity") - 0.5));
  const auto d = capacity_dual_check(V, 1.0, {Point{0}, Point{1}}, {{"wide constant", Box::cube(1, -50.0, 50.0), 1.0}});
  const double bound = d.has("best_bound") ? d.constant("best_bound") : kInfinity;
  return {worst <= 1e-4 && bound <= 0.51,
          "max |C_V - 0.5| over probe sets " + num(worst) + "; dual bound " + num(bound) + " (limit 0.51)"};
}

Finding psi_and_poles() {
  const double c = 0.5;
  const auto ct = Potential::time_power(1, c, 1.0);
  const double err = std::abs(psi(ct, Point{}, 0.1, 1.0) - c * std::log(10.0));
  bool ok = err <= 1e-6 && pole_criterion(ct, Point{}, 1.0).verdict == Singularity::singular;
  std::string powers;
  for (double beta : {0.25, 0.5, 0.75}) {
    const auto v = pole_criterion(Potential::time_power(1, 1.0, beta), Point{}, 1.0).verdict;
    ok = ok && v == Singularity::not_singular;
    powers += " beta=" + num(beta) + ":" + to_string(v);
  }
  return {ok, "|psi(0, 0.1) - c ln 10| = " + num(err) + "; c/t singular; powers" + powers};
}

Finding weighted_norm() {
  const GridSpec g = line_grid(0.02, 0.01, std::pow(2.0, -1.0 / 8));
  const double a = weighted_estimate(Potential::time_power(1, 1.0, 0.5), kDelta, g).ratio();
  const double b = weighted_estimate(Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0)), kDelta, g).ratio();
  return {a <= 1.02 && b <= 1.02, "lhs / rhs: t^-1/2 " + num(a) + ", bump " + num(b) + " (limit 1.02)"};
}

Finding monotone_suite() {
  const GridSpec g = line_grid(0.02, 0.01, std::pow(2.0, -0.25));
  SweepOptions so;
  so.abs_tol = 1e-6;
  so.rel_tol = 0.01;
  so.throw_on_violation = false;
  const std::vector<Potential> catalog{Potential::zero(1),
                                       Potential::time_power(1, 0.5, 1.0),
                                       Potential::time_power(1, 1.0, 0.5),
                                       Potential::hardy(1, 1.0, 0.5),
                                       Potential::product(1, 1.0, 0.5, 0.5),
                                       Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0))};
  double mono = 0.0, comp = 0.0;
  std::string witness;
  for (const auto& V : catalog) {
    const auto a = solve_exhaustion(V, kDelta, {2.0, 4.0, 8.0}, g, so);
    const auto b = solve_level_truncation(V, kDelta, {1.0, 10.0, 100.0, 1000.0}, g, so);
    const auto c = solve_time_truncation(V, kDelta, {2.0, 0.5, 0.1, 0.02}, g, so);
    for (const auto* r : {&a, &b, &c}) {
      if (r->monotone.worst > mono) {
        mono = r->monotone.worst;
        witness = V.describe() + ": " + r->monotone.witness;
      }
      for (const auto& f : r->members) comp = std::max(comp, comparison_check(f, kDelta, so.abs_tol, so.rel_tol).worst);
    }
  }
  return {mono <= 1.0 && comp <= 1.0, "worst violation / slack: monotonicity " + num(mono) + ", comparison " +
                                          num(comp) + (mono > 1.0 ? " at " + witness : "")};
}

Finding harnack() {
  bool ok = true;
  std::string detail;
  for (double c : {0.0, 0.5}) {
    double C[2];
    int n = 0;
    for (double h : {0.02, 0.01}) {
      const GridSpec g = line_grid(h, 0.05, std::pow(2.0, -0.25));
      const auto u = step_solve(Potential::time_power(1, c, 1.0), g, power_profile(g, g.t_min, c), g.t_min, 1.0);
      HarnackOptions ho;
      ho.min_time_fraction = 0.1;
      C[n++] = harnack_audit(u, c, ho).constant;
    }
    const double drift = std::abs(C[1] - C[0]) / std::max(std::abs(C[0]), 1e-12);
    ok = ok && std::isfinite(C[0]) && std::isfinite(C[1]) && drift <= 0.1;
    detail += (c == 0.0 ? "H: " : "t^-c H: ") + num(C[0]) + " -> " + num(C[1]) + " (drift " + num(drift) + "); ";
  }
  return {ok, detail};
}

Finding representation() {
  const GridSpec g = line_grid(0.02, 0.05, std::pow(2.0, -0.25));
  const auto r0 = representation_check(Potential::zero(1), g);
  const double ce = 1.0 / std::sqrt(4.0 * kPi);
  const double dc = std::abs(r0.c_fit / ce - 1.0), dg = std::abs(r0.gamma_fit / 0.25 - 1.0);
  const auto rb = representation_check(Potential::bump(1, 3.0, Box::cube(1, -1.0, 1.0)), g);
  return {dc <= 0.05 && dg <= 0.05 && rb.envelope_ok,
          "V=0: constant off by " + num(dc) + ", gamma off by " + num(dg) + "; bump envelope " +
              (rb.envelope_ok ? "holds at " + std::to_string(rb.probes) + " probes" : "fails: " + rb.witness)};
}

const CellRecord& center_cell(const TraceReport& tr) {
  for (const auto& c : tr.cells)
    if (c.cell.contains(Point{})) return c;
  throw NumericalError("no cell at the origin");
}

Finding trace_extraction() {
  const GridSpec g = line_grid(0.005, std::ldexp(1.0, -14), std::pow(2.0, -0.25), 6.0);
  const auto V = Potential::time_power(1, 1.0, 0.5);
  const auto u = step_solve(V, g, kDelta, g.t_min, 1.0);
  const auto tr = initial_trace(u, V);
  const double mass = center_cell(tr).mass;
  const auto singular = tr.count(CellClass::singular);
  const double c = 0.5;
  const auto W = Potential::time_power(1, c, 1.0);
  auto w = step_solve(W, g, power_profile(g, g.t_min, c), g.t_min, 1.0);
  w.source = kDelta;
  const auto tw = initial_trace(w, W);
  const auto& o = center_cell(tw);
  const bool ok = std::abs(mass - 1.0) <= 0.02 && singular == 0 && o.cls == CellClass::singular &&
                  std::abs(o.exponent + c) <= 0.1 * c;
  return {ok, "t^-1/2: origin cell mass " + num(mass) + ", " + std::to_string(singular) +
                  " singular cells; c/t: origin " + to_string(o.cls) + ", blow-up exponent " + num(o.exponent)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Finding determinism() {
  const fs::path base = fs::temp_directory_path() / ("singheat-determinism-" + std::to_string(::getpid()));
  ExperimentConfig cfg;
  RunOptions o1, o2;
  o1.output_dir = (base / "a").string();
  o2.output_dir = (base / "b").string();
  const auto a = run_subcommand("validate", cfg, o1);
  const auto b = run_subcommand("validate", cfg, o2);
  bool same = a.files == b.files && !a.files.empty();
  std::size_t compared = 0;
  for (const auto& f : a.files) {
    if (!same) break;
    same = slurp(fs::path(a.output_dir) / f) == slurp(fs::path(b.output_dir) / f);
    ++compared;
  }
  fs::remove_all(base);
  return {same && a.failures == 0, std::to_string(compared) + " files compared, " +
                                       (same ? "all bit-identical" : "outputs differ") + "; oracle failures " +
                                       std::to_string(a.failures)};
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<std::pair<std::string, std::function<Finding()>>> criteria{
      {"free-kernel fidelity", free_kernel},
      {"closed-form singular solution", closed_form},
      {"level-truncation law", level_truncation_law},
      {"reduced-measure dichotomy", reduced_dichotomy},
      {"singular-set scan", singular_set_scan},
      {"capacity and dual certificate", capacity},
      {"psi and pole criterion", psi_and_poles},
      {"weighted norm estimate", weighted_norm},
      {"monotone-scheme suite", monotone_suite},
      {"Harnack audit", harnack},
      {"representation envelope", representation},
      {"trace extraction", trace_extraction},
      {"determinism of validate", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Finding r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                r.detail.c_str(), secs);
    if (!r.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

#include "singheat/classify.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <random>
#include <sstream>

#include "singheat/kernel.hpp"

namespace singheat {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::divergent: return "divergent";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(Singularity s) {
  switch (s) {
    case Singularity::singular: return "singular";
    case Singularity::not_singular: return "not_singular";
    case Singularity::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

bool ClassificationReport::has(const std::string& name) const {
  return std::any_of(constants.begin(), constants.end(), [&](const auto& c) { return c.first == name; });
}

double ClassificationReport::constant(const std::string& name) const {
  for (const auto& [k, v] : constants)
    if (k == name) return v;
  throw DomainError("report '" + criterion + "' has no constant '" + name + "'");
}

void ClassificationReport::set(const std::string& name, double value) {
  for (auto& [k, v] : constants)
    if (k == name) {
      v = value;
      return;
    }
  constants.emplace_back(name, value);
}

Box whole_space(int dim) { return Box::cube(dim, -kInfinity, kInfinity); }

namespace {

std::string point_label(const Point& p, int n) {
  std::string s = "(";
  for (int k = 0; k < n; ++k) s += (k ? " " : "") + format_double(p[k]);
  return s + ")";
}

Outcome outcome_of(Verdict v) {
  switch (v) {
    case Verdict::converged: return Outcome::pass;
    case Verdict::divergent: return Outcome::divergent;
    case Verdict::inconclusive: return Outcome::inconclusive;
  }
  return Outcome::inconclusive;
}

QuadratureTrail single_value_trail(double level, double value) {
  QuadratureTrail trail;
  trail.levels = {level};
  trail.values = {value};
  trail.gaps = {value};
  trail.value = value;
  if (std::isinf(value)) {
    trail.verdict = Verdict::divergent;
    trail.error_estimate = kInfinity;
  } else {
    trail.verdict = Verdict::converged;
    trail.error_estimate = 0.0;
  }
  return trail;
}

std::vector<ProbeRecord> integrate_probes(const Potential& V, double T, const std::vector<Point>& probes,
                                          const Box& region, const ClassifyOptions& opts) {
  std::vector<ProbeRecord> rows(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    ProbeRecord& r = rows[i];
    r.point = probes[i];
    r.label = point_label(probes[i], V.dim());
    r.trail = classification_integral(V, probes[i], T, region, opts);
    r.verdict = r.trail.verdict;
    r.value = r.trail.value;
  });
  return rows;
}

}  // namespace

QuadratureTrail classification_integral(const Potential& V, const Point& y, double T, const Box& region,
                                        const ClassifyOptions& opts) {
  if (!(T > 0.0)) throw DomainError("horizon T must be > 0");
  return time_refinement(
      [&](double t) { return potential_kernel_integral(V, y, t, t, region, opts.cubature); }, T, opts.trail);
}

ClassificationReport admissibility(const Potential& V, const Measure& mu, double R, double T,
                                   const ClassifyOptions& opts) {
  if (!(R > 0.0)) throw DomainError("admissibility: R must be > 0");
  if (mu.dim() != V.dim()) throw DomainError("admissibility: dimension mismatch");
  mT_norm(mu, T);
  ClassificationReport rep;
  rep.criterion = "admissibility";
  rep.inputs = V.describe() + "; R=" + format_double(R) + "; T=" + format_double(T);
  const Box cyl = Box::cube(V.dim(), -R, R);
  const auto atoms = mu.discrete_atoms();
  ProbeRecord row;
  row.label = "R=" + format_double(R);
  row.trail = time_refinement(
      [&](double t) {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight * potential_kernel_integral(V, a.x, t, t, cyl, opts.cubature);
        return s;
      },
      T, opts.trail);
  row.verdict = row.trail.verdict;
  row.value = row.trail.value;
  rep.verdict = outcome_of(row.verdict);
  rep.set("M_R", row.value);
  if (rep.verdict == Outcome::divergent) rep.note = "not admissible";
  rep.probes.push_back(std::move(row));
  return rep;
}

ClassificationReport subcritical_check(const Potential& V, double R, double T, const std::vector<Point>& probes,
                                       const ClassifyOptions& opts) {
  if (!(R > 0.0)) throw DomainError("subcritical_check: R must be > 0");
  if (probes.empty()) throw DomainError("subcritical_check: empty probe set");
  ClassificationReport rep;
  rep.criterion = "subcritical";
  rep.inputs = V.describe() + "; R=" + format_double(R) + "; T=" + format_double(T);
  rep.probes = integrate_probes(V, T, probes, Box::cube(V.dim(), -R, R), opts);
  double m_R = 0.0;
  bool any_div = false, any_inc = false;
  for (auto& r : rep.probes) {
    r.weighted = r.value * std::exp(norm2(r.point, V.dim()) / (4.0 * T));
    if (r.verdict == Verdict::divergent) {
      if (!any_div) rep.note = "witness y=" + r.label;
      any_div = true;
    } else if (r.verdict == Verdict::inconclusive) {
      any_inc = true;
    } else {
      m_R = std::max(m_R, r.weighted);
    }
  }
  rep.verdict = any_div ? Outcome::fail : any_inc ? Outcome::inconclusive : Outcome::pass;
  rep.set("m_R", any_div ? kInfinity : m_R);
  return rep;
}

namespace {

/// int_0^lambda int_cube V dx dt.
double local_space_time_integral(const Potential& V, const Box& cube, double lambda, const ClassifyOptions& opts) {
  const int n = V.dim();
  if (V.is_zero()) return 0.0;
  if (V.space_independent()) return cube.volume() * V.time_integral(0.0, lambda);
  const double active = std::max(0.0, lambda - V.cut());
  if (const auto* b = std::get_if<BoundedBump>(&V.kind()))
    return std::min(b->c, V.cap()) * cube.intersect(b->box).volume() * active;
  if (std::holds_alternative<Hardy>(V.kind())) {
    if (active == 0.0) return 0.0;
    std::vector<Focus> foci{{Point{}, 1e-3 * std::sqrt(cube.volume()) / n}};
    return active * cubature([&](const Point& x) { return V.eval(x, lambda); }, cube, foci, opts.cubature);
  }
  const std::vector<Focus> foci{{Point{}, 1e-3 * (cube.hi[0] - cube.lo[0])}};
  const auto trail = time_refinement(
      [&](double t) { return cubature([&](const Point& x) { return V.eval(x, t); }, cube, foci, opts.cubature); },
      lambda, opts.trail);
  if (trail.divergent()) return kInfinity;
  if (!trail.converged()) throw NumericalError("local integral inconclusive");
  return trail.value;
}

}  // namespace

ClassificationReport strong_subcritical_sufficient(const Potential& V, double T, const std::vector<Point>& probes,
                                                   const std::vector<double>& lambda_levels,
                                                   const StrongSubcriticalOptions& opts) {
  if (probes.empty()) throw DomainError("strong_subcritical_sufficient: empty probe set");
  if (lambda_levels.size() < 3) throw DomainError("strong_subcritical_sufficient: need at least three lambda levels");
  for (std::size_t i = 1; i < lambda_levels.size(); ++i)
    if (!(lambda_levels[i] < lambda_levels[i - 1])) throw DomainError("lambda levels must decrease");
  const int n = V.dim();
  ClassificationReport rep;
  rep.criterion = "strong_subcritical";
  rep.inputs = V.describe() + "; T=" + format_double(T);
  rep.probes.resize(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    ProbeRecord& r = rep.probes[i];
    r.point = probes[i];
    r.label = point_label(probes[i], n);
    const double weight = std::exp(norm2(probes[i], n) / (4.0 * T));
    QuadratureTrail& tr = r.trail;
    for (double lam : lambda_levels) {
      const Box cube = Box::centered(n, probes[i], lam * lam);
      double scaled = weight * std::pow(lam, -n) * local_space_time_integral(V, cube, lam, opts.classify);
      tr.gaps.push_back(tr.values.empty() ? scaled : scaled - tr.values.back());
      tr.levels.push_back(lam);
      tr.values.push_back(scaled);
    }
    const std::size_t L = tr.values.size();
    const double last = tr.values[L - 1];
    tr.value = last;
    if (std::isinf(last)) {
      tr.verdict = Verdict::divergent;
      r.note = "scaled local integral infinite";
    } else if (tr.values[L - 3] >= tr.values[L - 2] && tr.values[L - 2] >= last && last < opts.tolerance) {
      tr.verdict = Verdict::converged;
      tr.error_estimate = last;
    } else {
      tr.verdict = Verdict::inconclusive;
      r.note = last < opts.tolerance ? "tail not monotone" : "tail above tolerance";
    }
    r.verdict = tr.verdict;
    r.value = last;
    r.weighted = last;
  });
  bool any_fail = false, any_inc = false;
  for (const auto& r : rep.probes) {
    any_fail |= r.verdict == Verdict::divergent;
    any_inc |= r.verdict == Verdict::inconclusive;
  }
  rep.verdict = any_fail ? Outcome::fail : any_inc ? Outcome::inconclusive : Outcome::pass;

  // Random unions of small cells: the kernel-weighted integral over E should shrink with |E|.
  std::mt19937_64 rng(opts.seed);
  const std::size_t np = std::min(opts.spot_probes, probes.size());
  double previous = kInfinity;
  bool decreasing = true;
  for (double rho : opts.spot_sizes) {
    const auto cells_per_dim = static_cast<std::uint64_t>(std::max(1.0, std::floor(2.0 / rho)));
    std::uniform_int_distribution<std::uint64_t> pick(0, cells_per_dim - 1);
    std::vector<Box> cells;
    for (int c = 0; c < opts.spot_cells; ++c) {
      Box cell;
      cell.dim = n;
      for (int k = 0; k < n; ++k) {
        cell.lo[k] = -1.0 + rho * static_cast<double>(pick(rng));
        cell.hi[k] = cell.lo[k] + rho;
      }
      cells.push_back(cell);
    }
    double worst = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      double s = 0.0;
      for (const auto& cell : cells) {
        const auto tr = classification_integral(V, probes[p], T, cell, opts.classify);
        s += tr.divergent() ? kInfinity : tr.value;
      }
      worst = std::max(worst, s);
    }
    rep.set("spot_E_" + format_double(rho), worst);
    if (!(worst <= previous)) decreasing = false;
    previous = worst;
  }
  rep.set("spot_decreasing", decreasing ? 1.0 : 0.0);
  if (!decreasing) rep.note = "random-union spot check not decreasing";
  return rep;
}

QuadratureTrail psi_trail(const Potential& V, const Point& x, double t, double T, const ClassifyOptions& opts) {
  if (!(t > 0.0 && t < T)) throw DomainError("psi needs 0 < t < T");
  if (V.space_independent()) return single_value_trail(t, V.time_integral(t, T));
  const Box all = whole_space(V.dim());
  return time_refinement(
      [&](double tau) { return potential_kernel_integral(V, x, tau, t + tau, all, opts.cubature); }, T - t,
      opts.trail);
}

double psi(const Potential& V, const Point& x, double t, double T, const ClassifyOptions& opts) {
  const auto trail = psi_trail(V, x, t, T, opts);
  if (trail.divergent()) return kInfinity;
  if (!trail.converged()) throw NumericalError("psi trail inconclusive at t = " + format_double(t));
  return trail.value;
}

PoleCriterionResult pole_criterion(const Potential& V, const Point& xi, double T, int levels, const ClassifyOptions& opts) {
  if (!(T > 0.0)) throw DomainError("horizon T must be > 0");
  PoleCriterionResult res;
  std::vector<double> ts, vals;
  bool inner_inconclusive = false;
  for (int j = 1; j <= levels; ++j) {
    const double t = T * std::ldexp(1.0, -j);
    const auto inner = psi_trail(V, xi, t, T, opts);
    if (inner.verdict == Verdict::inconclusive) inner_inconclusive = true;
    ts.push_back(t);
    vals.push_back(inner.divergent() ? kInfinity : inner.value);
    double limit = 0.0, err = 0.0;
    if (judge_sequence(vals, opts.trail, &limit, &err) != Verdict::inconclusive) break;
  }
  res.trail = analyze_sequence(ts, vals, opts.trail);
  if (res.trail.divergent()) res.verdict = Singularity::singular;
  else if (res.trail.converged() && !inner_inconclusive) res.verdict = Singularity::not_singular;
  else res.verdict = Singularity::inconclusive;
  return res;
}

ClassificationReport singular_scan(const Potential& V, double T, const std::vector<Point>& probes,
                                   const ClassifyOptions& opts) {
  if (probes.empty()) throw DomainError("singular_scan: empty probe set");
  ClassificationReport rep;
  rep.criterion = "singular_scan";
  rep.inputs = V.describe() + "; T=" + format_double(T);
  rep.probes = integrate_probes(V, T, probes, whole_space(V.dim()), opts);
  int singular = 0, local_failures = 0;
  bool any_inc = false;
  for (auto& r : rep.probes) {
    r.weighted = r.value;
    if (r.verdict == Verdict::inconclusive) any_inc = true;
    if (r.verdict != Verdict::divergent) continue;
    ++singular;
    bool local_ok = true;
    for (double rad : {1.0, 0.1}) {
      const auto tr = classification_integral(V, r.point, T, Box::centered(V.dim(), r.point, rad), opts);
      if (!tr.divergent()) local_ok = false;
    }
    r.note = local_ok ? "local divergence at r=1,0.1" : "local check failed";
    if (!local_ok) ++local_failures;
  }
  rep.set("singular_probes", singular);
  rep.set("local_check_failures", local_failures);
  rep.verdict = local_failures ? Outcome::fail : any_inc ? Outcome::inconclusive : Outcome::pass;
  return rep;
}

namespace {

struct CapacityValue {
  double capacity = 0.0;
  bool decisive = true;
};

CapacityValue capacity_of(const std::vector<ProbeRecord>& rows, std::size_t begin, std::size_t end) {
  double sup = 0.0;
  CapacityValue cv;
  for (std::size_t i = begin; i < end; ++i) {
    if (rows[i].verdict == Verdict::divergent) return {0.0, true};
    if (rows[i].verdict == Verdict::inconclusive) cv.decisive = false;
    sup = std::max(sup, rows[i].value);
  }
  cv.capacity = sup > 0.0 ? 1.0 / sup : kInfinity;
  return cv;
}

}  // namespace

ClassificationReport capacity_compact(const Potential& V, double T, const std::vector<Point>& E,
                                      const ClassifyOptions& opts) {
  if (E.empty()) throw DomainError("capacity_compact: empty set");
  ClassificationReport rep;
  rep.criterion = "capacity";
  rep.inputs = V.describe() + "; T=" + format_double(T) + "; |E|=" + std::to_string(E.size());
  rep.probes = integrate_probes(V, T, E, whole_space(V.dim()), opts);
  for (auto& r : rep.probes) r.weighted = r.value;
  const auto all = capacity_of(rep.probes, 0, E.size());
  rep.set("capacity", all.capacity);
  if (E.size() >= 2) {
    const std::size_t half = E.size() / 2;
    const auto c1 = capacity_of(rep.probes, 0, half);
    const auto c2 = capacity_of(rep.probes, half, E.size());
    rep.set("capacity_E1", c1.capacity);
    rep.set("capacity_E2", c2.capacity);
    const double lo = std::min(c1.capacity, c2.capacity);
    const bool min_rule = lo == all.capacity || std::abs(lo - all.capacity) <= 1e-12 * std::abs(lo);
    rep.set("union_min_rule", min_rule ? 1.0 : 0.0);
    rep.set("union_max_value", std::max(c1.capacity, c2.capacity));
  }
  rep.verdict = all.decisive ? Outcome::pass : Outcome::inconclusive;
  return rep;
}

std::vector<double> default_lambda_sweep() {
  std::vector<double> s;
  for (int k = -3000; k <= 1500; ++k) s.push_back(std::pow(10.0, k / 500.0));
  return s;
}

ClassificationReport capacity_dual_check(const Potential& V, double T, const std::vector<Point>& E,
                                         const std::vector<TestFunction>& family,
                                         const std::vector<double>& lambda_sweep, const ClassifyOptions& opts) {
  if (lambda_sweep.empty()) throw DomainError("capacity_dual_check: empty lambda sweep");
  ClassificationReport rep = capacity_compact(V, T, E, opts);
  rep.criterion = "capacity_dual";
  const double cap = rep.constant("capacity");
  std::vector<double> sweep = lambda_sweep;
  std::sort(sweep.begin(), sweep.end());
  double best = kInfinity;
  int certificates = 0;
  for (const auto& f : family) {
    ProbeRecord row;
    row.label = f.name;
    if (!(f.level > 0.0) || f.box.empty()) {
      row.note = "infeasible";
      row.value = 0.0;
      row.weighted = kInfinity;
      rep.probes.push_back(row);
      continue;
    }
    // check-H[f] is linear in f, so min over E of check-H[f / level] decides every lambda at once.
    double worst = kInfinity;
    bool inconclusive = false;
    for (const auto& y : E) {
      const auto tr = classification_integral(V, y, T, f.box, opts);
      if (tr.verdict == Verdict::inconclusive) inconclusive = true;
      worst = std::min(worst, tr.divergent() ? kInfinity : tr.value);
    }
    row.value = f.level * worst;
    row.verdict = inconclusive ? Verdict::inconclusive : Verdict::converged;
    double bound = kInfinity;
    for (double lam : sweep)
      if (lam * row.value >= 1.0) {
        bound = lam * f.level;
        break;
      }
    row.weighted = bound;
    if (bound < kInfinity) {
      ++certificates;
      best = std::min(best, bound);
      row.note = "feasible";
    } else {
      row.note = "infeasible";
    }
    rep.probes.push_back(row);
  }
  rep.set("certificates", certificates);
  rep.set("best_bound", best);
  if (certificates == 0) {
    rep.note = "no certificate found";
    return rep;
  }
  const bool consistent = cap <= best * (1.0 + 1e-9);
  rep.set("consistent", consistent ? 1.0 : 0.0);
  if (!consistent) {
    rep.verdict = Outcome::fail;
    rep.note = "dual bound below capacity";
  }
  return rep;
}

WeightField torsion_function(const GridSpec& grid) {
  grid.validate();
  if (grid.dim > 2) throw DomainError("torsion_function supports n = 1 or 2");
  const std::size_t m = grid.nodes_per_dim();
  const double h2 = grid.h * grid.h;
  WeightField w{grid, std::vector<double>(grid.node_count(), 0.0)};
  if (grid.dim == 1) {
    // Thomas algorithm for -w'' = 1 on the interior nodes.
    const std::size_t k = m - 2;
    std::vector<double> c(k), d(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double denom = 2.0 + (i ? c[i - 1] : 0.0);
      c[i] = -1.0 / denom;
      d[i] = (h2 + (i ? d[i - 1] : 0.0)) / denom;
    }
    for (std::size_t i = k; i-- > 0;) w.values[i + 1] = d[i] - c[i] * (i + 1 < k ? w.values[i + 2] : 0.0);
    return w;
  }
  const std::size_t k = m - 2;
  auto id = [k](std::size_t i, std::size_t j) { return static_cast<int>(i * k + j); };
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(5 * k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      trips.emplace_back(id(i, j), id(i, j), 4.0);
      if (i > 0) trips.emplace_back(id(i, j), id(i - 1, j), -1.0);
      if (i + 1 < k) trips.emplace_back(id(i, j), id(i + 1, j), -1.0);
      if (j > 0) trips.emplace_back(id(i, j), id(i, j - 1), -1.0);
      if (j + 1 < k) trips.emplace_back(id(i, j), id(i, j + 1), -1.0);
    }
  Eigen::SparseMatrix<double> A(static_cast<int>(k * k), static_cast<int>(k * k));
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw NumericalError("torsion_function: factorisation failed");
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(static_cast<int>(k * k), h2);
  const Eigen::VectorXd sol = solver.solve(rhs);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) w.values[(i + 1) * m + (j + 1)] = sol[id(i, j)];
  return w;
}

}  // namespace singheat

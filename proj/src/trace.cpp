#include "singheat/trace.hpp"

#include <algorithm>

#include "singheat/classify.hpp"
#include "singheat/kernel.hpp"

namespace singheat {

std::string to_string(CellClass c) {
  switch (c) {
    case CellClass::regular: return "regular";
    case CellClass::singular: return "singular";
    case CellClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::size_t TraceReport::count(CellClass c) const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [c](const auto& r) { return r.cls == c; }));
}

Measure TraceReport::regular_measure(int dim) const {
  std::vector<Atom> atoms;
  for (const auto& r : cells)
    if (r.cls == CellClass::regular && r.mass > 0.0) atoms.push_back({r.center, r.mass});
  return Measure(dim, std::move(atoms));
}

std::vector<Box> TraceReport::singular_cells() const {
  std::vector<Box> out;
  for (const auto& r : cells)
    if (r.cls == CellClass::singular) out.push_back(r.cell);
  return out;
}

double cell_measure(const Measure& mu, const Box& box) {
  double s = 0.0;
  for (const auto& a : mu.discrete_atoms())
    if (box.contains(a.x)) s += a.weight;
  return s;
}

namespace {

/// Snapshot indices at dyadic times T 2^-l, l >= 1, in order of decreasing time.
std::vector<std::size_t> dyadic_snapshots(const Field& u) {
  const double T = u.times.back();
  std::vector<std::size_t> out;
  for (std::size_t j = u.times.size(); j-- > 0;) {
    const double l = std::log2(T / u.times[j]);
    if (l > 0.5 && std::abs(l - std::round(l)) < 1e-9) out.push_back(j);
  }
  if (out.size() < 3) throw DomainError("initial_trace needs snapshots at three or more dyadic times T 2^-l");
  return out;
}

std::vector<Point> cell_centers(int n, double size, double half_width) {
  const int J = static_cast<int>(std::floor(half_width / size - 0.5 + 1e-9));
  std::vector<double> axis;
  for (int j = -J; j <= J; ++j) axis.push_back(j * size);
  std::vector<Point> out;
  if (n == 1) {
    for (double a : axis) out.push_back({a, 0.0, 0.0});
  } else if (n == 2) {
    for (double a : axis)
      for (double b : axis) out.push_back({a, b, 0.0});
  } else {
    for (double a : axis)
      for (double b : axis)
        for (double c : axis) out.push_back({a, b, c});
  }
  return out;
}

double extrapolate(const std::vector<double>& m, std::string& method) {
  const std::size_t L = m.size();
  if (L < 3) {
    method = "finest level";
    return m.empty() ? 0.0 : m.back();
  }
  const double d1 = m[L - 2] - m[L - 3];
  const double d2 = m[L - 1] - m[L - 2];
  if (d1 == 0.0 && d2 == 0.0) {
    method = "constant";
    return m.back();
  }
  if (d1 != 0.0) {
    const double q = d2 / d1;
    if (q >= 0.0 && q < 0.9) {
      method = "aitken";
      return std::max(0.0, m.back() + d2 * q / (1.0 - q));
    }
  }
  method = "finest level";
  return m.back();
}

double fit_exponent(const std::vector<double>& t, const std::vector<double>& m) {
  const std::size_t L = m.size();
  if (L < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = L >= 3 ? L - 3 : 0; i < L; ++i) {
    if (!(m[i] > 0.0)) continue;
    const double x = std::log(t[i]), y = std::log(m[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) return 0.0;
  const double den = cnt * sxx - sx * sx;
  return den != 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
}

}  // namespace

TraceReport initial_trace(const Field& u, const Potential& V, const TraceOptions& opts) {
  if (opts.cell_sizes.empty()) throw DomainError("initial_trace: no cell sizes");
  if (V.dim() != u.grid.dim) throw DomainError("initial_trace: dimension mismatch");
  const int n = u.grid.dim;
  const auto levels = dyadic_snapshots(u);
  const std::size_t last = u.times.size() - 1;

  // Scale for the absolute tolerance: total mass plus total absorption.
  TrailOptions trail = opts.trail;
  trail.abs_tol = std::max(trail.abs_tol, 1e-12 * (u.mass(0) + u.mass(last) + u.absorbed_mass(last)));

  const double fine = *std::min_element(opts.cell_sizes.begin(), opts.cell_sizes.end());
  // While sqrt(t) exceeds the cell size the per-level gaps look flat, which mimics divergence.
  if (u.times.front() > fine * fine / 16.0)
    throw DomainError("initial_trace: start time " + format_double(u.times.front()) +
                      " does not resolve cells of size " + format_double(fine) + " (need t_min <= size^2/16)");
  TraceReport rep;
  const auto centers = cell_centers(n, fine, opts.half_width);
  rep.cells.resize(centers.size());
  parallel_for(centers.size(), [&](std::size_t c) {
    CellRecord& rec = rep.cells[c];
    rec.center = centers[c];
    rec.cell = Box::centered(n, centers[c], 0.5 * fine);
    bool all_div = true;
    for (double size : opts.cell_sizes) {
      const Box U = Box::centered(n, centers[c], 0.5 * size);
      // Per-interval absorption in U, then partial sums over (t_l, T].
      std::vector<double> per(u.times.size(), 0.0);
      for (std::size_t q = 1; q <= last; ++q) per[q] = u.cell_sum(u.absorbed[q], U);
      std::vector<double> ts, vals;
      for (std::size_t j : levels) {
        double s = 0.0;
        for (std::size_t q = j + 1; q <= last; ++q) s += per[q];
        ts.push_back(u.times[j]);
        vals.push_back(s);
      }
      auto tr = analyze_sequence(ts, vals, trail);
      rec.size_verdicts.push_back(tr.verdict);
      if (tr.verdict != Verdict::divergent) all_div = false;
      if (size == fine) rec.trail = std::move(tr);
    }
    for (std::size_t j : levels) {
      rec.level_times.push_back(u.times[j]);
      rec.level_masses.push_back(u.cell_sum(u.values[j], rec.cell));
    }
    rec.exponent = fit_exponent(rec.level_times, rec.level_masses);
    const std::size_t L = rec.level_masses.size();
    rec.blowup = rec.exponent < 0.0 && rec.level_masses[L - 1] > rec.level_masses[L - 2] &&
                 rec.level_masses[L - 2] > rec.level_masses[L - 3];
    if (rec.trail.converged()) {
      rec.cls = CellClass::regular;
      rec.mass = extrapolate(rec.level_masses, rec.mass_method);
    } else if (all_div) {
      rec.cls = CellClass::singular;
      rec.mass = kInfinity;
      rec.mass_method = rec.blowup ? "blow-up" : "divergent without mass growth";
    } else {
      rec.cls = CellClass::inconclusive;
      rec.mass = rec.level_masses.back();
      rec.mass_method = "finest level";
    }
  });
  return rep;
}

LowerBoundReport trace_lower_bound_check(const Field& u, const TraceReport& trace, const Potential& V, double tol) {
  LowerBoundReport rep;
  const int n = u.grid.dim;
  rep.trace_measure = trace.regular_measure(n);
  std::vector<std::vector<double>> w;
  if (rep.trace_measure.is_zero()) {
    for (const auto& snap : u.values) w.emplace_back(snap.size(), 0.0);
  } else {
    SolveOptions o;
    o.dirichlet = u.dirichlet;
    o.snapshots = u.times;
    w = step_solve(V, u.grid, rep.trace_measure, u.times.front(), u.times.back(), o).values;
  }
  for (std::size_t j = 0; j < u.times.size(); ++j) {
    const double sup = *std::max_element(u.values[j].begin(), u.values[j].end());
    if (sup <= 0.0) continue;
    for (std::size_t i = 0; i < u.values[j].size(); ++i) {
      const double d = (w[j][i] - u.values[j][i]) / sup;
      rep.max_excess = std::max(rep.max_excess, d);
      rep.max_gap = std::max(rep.max_gap, std::abs(d));
    }
  }
  rep.ok = rep.max_excess <= tol;
  return rep;
}

HarnackReport harnack_audit(const Field& u, double C1, const HarnackOptions& opts) {
  HarnackReport rep;
  rep.C1 = C1;
  const int n = u.grid.dim;
  const double T = u.times.back();
  std::vector<std::size_t> snaps;
  for (std::size_t j = 0; j < u.times.size(); ++j)
    if (u.times[j] >= opts.min_time_fraction * T) snaps.push_back(j);
  double sup = 0.0;
  for (std::size_t j : snaps) sup = std::max(sup, *std::max_element(u.values[j].begin(), u.values[j].end()));
  struct Sample {
    Point x;
    double t;
    double v;
  };
  std::vector<Sample> samples;
  for (std::size_t j : snaps)
    for (double x0 : opts.xs) {
      const Point x{x0, 0.0, 0.0};
      samples.push_back({x, u.times[j], u.at(j, x)});
    }
  double best = -kInfinity;
  for (const auto& early : samples)
    for (const auto& late : samples) {
      const double s = early.t, t = late.t;
      if (!(t - s > 1e-12 * t)) continue;  // degenerate or reversed pair
      if (early.v <= opts.floor * sup || late.v <= opts.floor * sup) {
        ++rep.rejected;
        continue;
      }
      ++rep.pairs;
      const double denom = dist2(late.x, early.x, n) / (t - s) + t / s + 1.0;
      const double c = std::log(early.v / late.v) / denom;
      if (c > best) {
        best = c;
        rep.witness = "y=" + format_double(early.x[0]) + " s=" + format_double(s) + " x=" + format_double(late.x[0]) +
                      " t=" + format_double(t);
      }
    }
  rep.constant = std::max(0.0, best);
  if (rep.pairs == 0) rep.constant = kInfinity;
  return rep;
}

RepresentationReport representation_check(const Potential& V, const GridSpec& grid, const RepresentationOptions& opts) {
  const int n = grid.dim;
  const double sigma = opts.sigma > 0.0 ? opts.sigma : std::sqrt(2.0 * grid.t_min);
  const auto est = kernel_estimate(V, opts.source, grid, sigma, opts.k);
  const Field& f = est.field;
  const double T = grid.T;
  const Potential Vk = V.level_truncate(opts.k);
  struct Probe {
    double z, w, t;
    bool fit;    // enters the regression for (c, gamma)
    bool train;  // fixes the envelope constants; the others are held out
  };
  std::vector<Probe> probes;
  for (std::size_t j = 0; j < f.times.size(); ++j) {
    const double t = f.times[j];
    if (t < opts.min_time * T) continue;
    const bool last = j + 1 == f.times.size();
    for (std::size_t i = 0; i < f.node_count(); i += opts.node_stride) {
      const Point x = f.grid.node(i);
      const double z = dist2(x, opts.source, n) / t;
      if (z > opts.max_z) continue;
      const double hv = f.values[j][i];
      if (!(hv > 0.0)) continue;
      const double ps = last ? 0.0 : psi(Vk, x, t, T);
      const double gamma_hat = std::exp(-ps) * hv;
      const bool even = (i / opts.node_stride) % 2 == 0;
      probes.push_back({z, std::log(std::pow(t, 0.5 * n) * gamma_hat), t, z <= opts.train_z, even});
    }
  }
  RepresentationReport rep;
  rep.probes = probes.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& p : probes)
    if (p.fit) {
      sx += p.z;
      sy += p.w;
      sxx += p.z * p.z;
      sxy += p.z * p.w;
      ++cnt;
    }
  if (cnt < 3) throw NumericalError("representation_check: too few probes for the fit");
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / cnt;
  rep.gamma_fit = -slope;
  rep.c_fit = std::exp(icpt);
  rep.gamma1 = rep.gamma_fit + opts.gamma_margin * std::abs(rep.gamma_fit);
  rep.gamma2 = rep.gamma_fit - opts.gamma_margin * std::abs(rep.gamma_fit);
  double lo = kInfinity, hi = -kInfinity;
  for (const auto& p : probes)
    if (p.train) {
      lo = std::min(lo, p.w + rep.gamma1 * p.z);
      hi = std::max(hi, p.w + rep.gamma2 * p.z);
    }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw NumericalError("representation_check: no training probes");
  rep.c1 = std::exp(lo);
  rep.c2 = std::exp(hi);
  rep.envelope_ok = true;
  for (const auto& p : probes) {
    if (p.train) continue;
    const double lower = lo - rep.gamma1 * p.z - opts.log_tol, upper = hi - rep.gamma2 * p.z + opts.log_tol;
    ++rep.held_out;
    if (p.w < lower || p.w > upper) {
      rep.envelope_ok = false;
      rep.witness = std::string(p.w < lower ? "below the lower" : "above the upper") + " envelope at t=" +
                    format_double(p.t) + ", |x-y|^2/t=" + format_double(p.z) + ", log excess " +
                    format_double(p.w < lower ? lower - p.w : p.w - upper);
      break;
    }
  }
  return rep;
}

namespace {

bool measure_leq(const Measure& a, const Measure& b) {
  // Atomwise comparison for atomic candidates at matching locations.
  const auto A = a.discrete_atoms();
  const auto B = b.discrete_atoms();
  for (const auto& x : A) {
    bool found = false;
    for (const auto& y : B)
      if (dist2(x.x, y.x, a.dim()) == 0.0 && x.weight <= y.weight) found = true;
    if (!found) return false;
  }
  return true;
}

}  // namespace

SweepTraceReport sweep_trace(const Field& u, const Potential& V, const std::vector<Measure>& candidates,
                             const std::vector<double>& k_list, const TraceOptions& opts, double tol) {
  SweepTraceReport rep;
  rep.trace = initial_trace(u, V, opts);
  const auto S = rep.trace.singular_cells();
  const std::size_t ncell = rep.trace.cells.size();
  rep.nu_s.assign(ncell, 0.0);
  if (S.empty()) {
    rep.empty_singular_set = true;
    return rep;
  }
  for (const auto& mu : candidates)
    for (const auto& a : mu.discrete_atoms()) {
      const bool inside = std::any_of(S.begin(), S.end(), [&](const Box& b) { return b.contains(a.x); });
      if (!inside) throw DomainError("candidate measure not supported in the singular set of u");
    }
  GridSpec g = u.grid;
  g.t_min = u.times.front();
  g.T = u.times.back();
  SweepOptions so;
  so.solve.dirichlet = u.dirichlet;
  so.solve.snapshots = u.times;
  for (const auto& mu : candidates) {
    SweepCandidateResult cr;
    const auto red = reduce(V, mu, g, k_list, so);
    cr.m_star = red.m_star;
    // u_mu* is solved from the reduced measure itself: the truncated members keep a full trace
    // for every finite k, so their t -> 0 limit would be taken in the wrong order.
    const double total = mu.total_mass();
    Field v = step_solve(V, g, mu.scaled(total > 0.0 ? red.m_star / total : 0.0), g.t_min, g.T, so.solve);
    // v = min{u, u_mu*}; absorption by the trapezoid rule between snapshots.
    for (std::size_t j = 0; j < v.times.size(); ++j)
      for (std::size_t i = 0; i < v.values[j].size(); ++i) v.values[j][i] = std::min(v.values[j][i], u.values[j][i]);
    for (std::size_t j = 1; j < v.times.size(); ++j)
      for (std::size_t i = 0; i < v.values[j].size(); ++i) {
        const Point x = v.grid.node(i);
        const double a = V.eval(x, v.times[j - 1]), b = V.eval(x, v.times[j]);
        const double fa = a < kInfinity ? a * v.values[j - 1][i] : 0.0;
        const double fb = b < kInfinity ? b * v.values[j][i] : 0.0;
        v.absorbed[j][i] = 0.5 * (fa + fb) * (v.times[j] - v.times[j - 1]);
      }
    const auto vt = initial_trace(v, V, opts);
    for (std::size_t c = 0; c < ncell; ++c) {
      std::string method;
      const double g_mass = extrapolate(vt.cells[c].level_masses, method);
      cr.gamma.push_back(std::max(0.0, g_mass));
      cr.mu_cells.push_back(cell_measure(mu, rep.trace.cells[c].cell));
      if (cr.gamma[c] > cr.mu_cells[c] + tol * std::max(1.0, mu.total_mass())) cr.below_candidate = false;
      rep.nu_s[c] = std::max(rep.nu_s[c], cr.gamma[c]);
    }
    rep.candidates.push_back(std::move(cr));
  }
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (i == j || !measure_leq(candidates[i], candidates[j])) continue;
      const double scale = tol * std::max(1.0, candidates[j].total_mass());
      for (std::size_t c = 0; c < ncell; ++c)
        if (rep.candidates[i].gamma[c] > rep.candidates[j].gamma[c] + scale) rep.nested_monotone = false;
    }
  return rep;
}

}  // namespace singheat

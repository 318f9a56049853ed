#include "singheat/solver.hpp"

#include <algorithm>
#include <numeric>

#include "singheat/kernel.hpp"
#include "singheat/quadrature.hpp"

namespace singheat {

// ---------------------------------------------------------------- Field

std::size_t Field::snapshot(double t) const {
  for (std::size_t j = 0; j < times.size(); ++j)
    if (std::abs(times[j] - t) <= 1e-9 * std::max(std::abs(t), 1e-300)) return j;
  throw DomainError("no snapshot at t = " + format_double(t));
}

std::size_t Field::nearest_snapshot(double t) const {
  if (!(t > 0.0)) throw DomainError("nearest_snapshot needs t > 0");
  std::size_t best = 0;
  for (std::size_t j = 1; j < times.size(); ++j)
    if (std::abs(std::log(times[j] / t)) < std::abs(std::log(times[best] / t))) best = j;
  return best;
}

double Field::at(std::size_t snap, const Point& x) const {
  const auto& u = values.at(snap);
  const std::size_t m = grid.nodes_per_dim();
  const int n = grid.dim;
  std::array<std::size_t, kMaxDim> i0{};
  std::array<double, kMaxDim> fr{};
  for (int k = 0; k < n; ++k) {
    const double s = (x[k] - grid.a) / grid.h;
    if (s < -1e-9 || s > static_cast<double>(m - 1) + 1e-9) return 0.0;
    double fl = std::floor(s);
    if (fl >= static_cast<double>(m - 1)) fl = static_cast<double>(m - 2);
    if (fl < 0.0) fl = 0.0;
    i0[k] = static_cast<std::size_t>(fl);
    fr[k] = std::clamp(s - fl, 0.0, 1.0);
  }
  double acc = 0.0;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < n; ++k) {
      const bool up = (corner >> k) & 1u;
      w *= up ? fr[k] : 1.0 - fr[k];
      flat = flat * m + i0[k] + (up ? 1 : 0);
    }
    if (w != 0.0) acc += w * u[flat];
  }
  return acc;
}

double Field::cell_sum(const std::vector<double>& nodal, const Box& box) const {
  const std::size_t m = grid.nodes_per_dim();
  const int n = grid.dim;
  const double h = grid.h;
  // Per-dimension overlap fraction of each node's dual cell [x - h/2, x + h/2] with the box.
  std::array<std::vector<std::pair<std::size_t, double>>, kMaxDim> frac;
  for (int k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      const double x = grid.coord(i);
      const double lo = std::max(x - 0.5 * h, std::max(box.lo[k], grid.a));
      const double hi = std::min(x + 0.5 * h, std::min(box.hi[k], grid.b));
      if (hi > lo) frac[k].emplace_back(i, (hi - lo) / h);
    }
    if (frac[k].empty()) return 0.0;
  }
  double total = 0.0;
  if (n == 1) {
    for (const auto& [i, f] : frac[0]) total += f * nodal[i];
  } else if (n == 2) {
    for (const auto& [i, fi] : frac[0])
      for (const auto& [j, fj] : frac[1]) total += fi * fj * nodal[i * m + j];
  } else {
    for (const auto& [i, fi] : frac[0])
      for (const auto& [j, fj] : frac[1])
        for (const auto& [l, fl] : frac[2]) total += fi * fj * fl * nodal[(i * m + j) * m + l];
  }
  return total * std::pow(h, n);
}

double Field::mass(std::size_t snap) const { return cell_sum(values.at(snap), grid.box()); }

double Field::absorbed_mass(std::size_t snap) const {
  double s = 0.0;
  for (std::size_t j = 1; j <= snap; ++j) s += cell_sum(absorbed.at(j), grid.box());
  return s;
}

// ---------------------------------------------------------------- stepping

namespace {

/// Crank-Nicolson along one grid line: (I - lam/2 D) u_new = (I + lam/2 D) u_old.
void cn_line(double* u, std::size_t m, std::size_t stride, double lam, bool dirichlet, std::vector<double>& rhs,
             std::vector<double>& cp) {
  const double half = 0.5 * lam;
  auto U = [&](std::size_t i) -> double& { return u[i * stride]; };
  std::size_t first = 0, last = m - 1;
  if (dirichlet) {
    U(0) = 0.0;
    U(m - 1) = 0.0;
    first = 1;
    last = m - 2;
    if (m < 3) return;
  }
  const std::size_t k = last - first + 1;
  rhs.resize(k);
  cp.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = first + r;
    const double left = i > 0 ? U(i - 1) : U(i + 1);  // reflecting ghost for i = 0
    const double right = i + 1 < m ? U(i + 1) : U(i - 1);
    rhs[r] = (1.0 - lam) * U(i) + half * (left + right);
  }
  // Off-diagonals: -half, doubled on the reflecting boundary rows.
  auto lower = [&](std::size_t r) { return (!dirichlet && r == k - 1) ? -lam : -half; };
  auto upper = [&](std::size_t r) { return (!dirichlet && r == 0) ? -lam : -half; };
  const double diag = 1.0 + lam;
  double denom = diag;
  cp[0] = upper(0) / denom;
  rhs[0] /= denom;
  for (std::size_t r = 1; r < k; ++r) {
    denom = diag - lower(r) * cp[r - 1];
    cp[r] = r + 1 < k ? upper(r) / denom : 0.0;
    rhs[r] = (rhs[r] - lower(r) * rhs[r - 1]) / denom;
  }
  for (std::size_t r = k - 1; r-- > 0;) rhs[r] -= cp[r] * rhs[r + 1];
  for (std::size_t r = 0; r < k; ++r) U(first + r) = std::max(0.0, rhs[r]);
}

void diffuse(std::vector<double>& u, const GridSpec& g, double dt, bool dirichlet) {
  const std::size_t m = g.nodes_per_dim();
  const double lam = dt / (g.h * g.h);
  std::vector<double> rhs, cp;
  if (g.dim == 1) {
    cn_line(u.data(), m, 1, lam, dirichlet, rhs, cp);
  } else if (g.dim == 2) {
    for (std::size_t i = 0; i < m; ++i) cn_line(u.data() + i * m, m, 1, lam, dirichlet, rhs, cp);
    for (std::size_t j = 0; j < m; ++j) cn_line(u.data() + j, m, m, lam, dirichlet, rhs, cp);
  } else {
    throw DomainError("PDE solves support n = 1 or 2");
  }
}

/// Nodal values of V at time t, caching time-independent kinds.
class NodalPotential {
 public:
  NodalPotential(const Potential& V, const GridSpec& g) : V_(V), g_(g) {
    if (V.space_independent()) {
      mode_ = Mode::scalar;
    } else if (std::holds_alternative<Hardy>(V.kind()) || std::holds_alternative<BoundedBump>(V.kind())) {
      mode_ = Mode::cached;
      const double t_ref = std::max(1.0, 2.0 * V.cut()) + 1.0;
      cache_.resize(g.node_count());
      for (std::size_t i = 0; i < cache_.size(); ++i) cache_[i] = V.eval(g.node(i), t_ref);
    } else {
      mode_ = Mode::direct;
    }
  }

  void fill(double t, std::vector<double>& out) const {
    out.resize(g_.node_count());
    switch (mode_) {
      case Mode::scalar: std::fill(out.begin(), out.end(), V_.time_profile(t)); break;
      case Mode::cached:
        if (t > V_.cut()) std::copy(cache_.begin(), cache_.end(), out.begin());
        else std::fill(out.begin(), out.end(), 0.0);
        break;
      case Mode::direct:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = V_.eval(g_.node(i), t);
        break;
    }
  }

 private:
  enum class Mode { scalar, cached, direct };
  const Potential& V_;
  const GridSpec& g_;
  Mode mode_;
  std::vector<double> cache_;
};

double finite_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (x < kInfinity) m = std::max(m, x);
  return m;
}

std::vector<double> snapshot_times(const GridSpec& grid, double t0, double T, const std::vector<double>& requested) {
  std::vector<double> out{t0};
  std::vector<double> src = requested.empty() ? grid.time_nodes() : requested;
  std::sort(src.begin(), src.end());
  for (double t : src)
    if (t > t0 * (1.0 + 1e-12) && t < T * (1.0 - 1e-12)) out.push_back(t);
  if (T > t0) out.push_back(T);
  return out;
}

}  // namespace

Field step_solve(const Potential& V, const GridSpec& grid, const std::vector<double>& init, double t0, double T,
                 const SolveOptions& opts) {
  grid.validate();
  if (grid.dim > 2) throw DomainError("PDE solves support n = 1 or 2");
  if (V.dim() != grid.dim) throw DomainError("potential and grid dimensions differ");
  if (!(t0 > 0.0) || !(T >= t0)) throw DomainError("step_solve needs 0 < t0 <= T");
  if (init.size() != grid.node_count()) throw DomainError("initial profile has the wrong size");
  for (double v : init)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("initial profile must be finite and nonnegative");

  Field f;
  f.grid = grid;
  f.dirichlet = opts.dirichlet;
  f.times = snapshot_times(grid, t0, T, opts.snapshots);
  f.provenance = "step_solve " + V.describe();
  f.source = Measure(grid.dim);

  const std::size_t N = grid.node_count();
  std::vector<double> u = init, u_prev(N), absorbed_step(N), vnodes, absorbed_acc(N, 0.0);
  if (opts.dirichlet) diffuse(u, grid, 0.0, true);  // zero the walls
  f.values.push_back(u);
  f.absorbed.emplace_back(N, 0.0);

  const NodalPotential nodal(V, grid);
  const double h2 = grid.h * grid.h;
  double t = t0;
  for (std::size_t s = 1; s < f.times.size(); ++s) {
    const double target = f.times[s];
    std::fill(absorbed_acc.begin(), absorbed_acc.end(), 0.0);
    while (t < target) {
      const double dmax = std::min(opts.step_fraction * t, h2);
      double dt;
      if (t + dmax * (1.0 + 1e-9) >= target) dt = target - t;
      else if (t + 2.0 * dmax > target) dt = 0.5 * (target - t);
      else dt = dmax;
      const double t_end = (dt == target - t) ? target : t + dt;
      nodal.fill(t_end, vnodes);
      int pieces = 1;
      while (dt / pieces * finite_max(vnodes) > opts.reaction_limit) {
        pieces *= 2;
        if (pieces > (1 << std::min(opts.max_subdivisions, 30)))
          throw NumericalError("step subdivision failed near t = " + format_double(t));
      }
      const double sub = dt / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double a = t + sub * p;
        const double b = p + 1 == pieces ? t_end : t + sub * (p + 1);
        if (pieces > 1) nodal.fill(b, vnodes);
        u_prev = u;
        diffuse(u, grid, b - a, opts.dirichlet);
        for (std::size_t i = 0; i < N; ++i) {
          const double before = u[i];
          const double v = vnodes[i];
          u[i] = v < kInfinity ? before / (1.0 + (b - a) * v) : 0.0;
          absorbed_step[i] = before - u[i];
          absorbed_acc[i] += absorbed_step[i];
        }
        if (opts.observer) opts.observer(StepInfo{a, b, u_prev, u, absorbed_step});
      }
      t = t_end;
    }
    f.values.push_back(u);
    f.absorbed.push_back(absorbed_acc);
  }
  return f;
}

std::vector<double> initial_profile(const GridSpec& grid, const Measure& mu, double t0, double factor,
                                    bool dirichlet) {
  if (mu.dim() != grid.dim) throw DomainError("measure and grid dimensions differ");
  const std::size_t N = grid.node_count();
  std::vector<double> u(N, 0.0);
  if (factor == 0.0 || mu.is_zero()) return u;
  for (std::size_t i = 0; i < N; ++i) u[i] = factor * heat_potential(mu, grid.node(i), t0);
  if (dirichlet) {
    const std::size_t m = grid.nodes_per_dim();
    for (std::size_t i = 0; i < N; ++i) {
      std::size_t r = i;
      for (int k = 0; k < grid.dim; ++k) {
        const std::size_t idx = r % m;
        r /= m;
        if (idx == 0 || idx == m - 1) u[i] = 0.0;
      }
    }
  }
  return u;
}

std::optional<double> exact_layer_factor(const Potential& V, double t0) {
  if (V.is_zero() || t0 <= V.cut()) return 1.0;
  if (!V.space_independent()) return std::nullopt;
  const double I = V.time_integral(0.0, t0);
  return std::isinf(I) ? 0.0 : std::exp(-I);
}

Field step_solve(const Potential& V, const GridSpec& grid, const Measure& mu, double t0, double T,
                 const SolveOptions& opts) {
  mT_norm(mu, T);
  const auto exact = exact_layer_factor(V, t0);
  const double factor = exact.value_or(1.0);
  Field f = step_solve(V, grid, initial_profile(grid, mu, t0, factor, opts.dirichlet), t0, T, opts);
  f.source = mu;
  f.layer_factor = factor;
  f.layer_exact = exact.has_value();
  return f;
}

// ---------------------------------------------------------------- sweeps

namespace {

/// Checks lower <= upper (+ slack) on the nodes of `lower`'s grid at common snapshot times.
void check_order(const Field& lower, const Field& upper, const SweepOptions& o, const std::string& what,
                 MonotoneCheck& out) {
  for (std::size_t j = 0; j < lower.times.size(); ++j) {
    std::size_t ju;
    try {
      ju = upper.snapshot(lower.times[j]);
    } catch (const DomainError&) {
      continue;
    }
    const double scale = *std::max_element(upper.values[ju].begin(), upper.values[ju].end());
    for (std::size_t i = 0; i < lower.node_count(); ++i) {
      const Point x = lower.grid.node(i);
      const double lo = lower.values[j][i];
      const double hi = upper.at(ju, x);
      const double slack = o.abs_tol * scale + o.rel_tol * std::max(std::abs(lo), std::abs(hi));
      const double excess = lo - hi;
      if (excess > 0.0) {
        const double ratio = slack > 0.0 ? excess / slack : kInfinity;
        if (ratio > out.worst) {
          out.worst = ratio;
          out.witness = what + " at t=" + format_double(lower.times[j]) + " node " + std::to_string(i);
        }
      }
    }
  }
  out.ok = out.worst <= 1.0;
}

// Last two members within 1% at every node, plus abs_tol of the snapshot sup so that far tails,
// where a Dirichlet cut dominates in relative terms, do not decide the verdict.
bool sweep_cauchy(const Field& a, const Field& b, double abs_tol) {
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    const std::size_t jb = b.snapshot(a.times[j]);
    double sup = 0.0;
    for (double v : a.values[j]) sup = std::max(sup, std::abs(v));
    for (std::size_t i = 0; i < a.node_count(); ++i) {
      const double x = a.values[j][i], y = b.at(jb, a.grid.node(i));
      if (std::abs(x - y) > 0.01 * std::max(std::abs(x), std::abs(y)) + abs_tol * sup + 1e-300) return false;
    }
  }
  return true;
}

void finish_sweep(SweepResult& r, bool increasing, const SweepOptions& o, const std::string& name) {
  for (std::size_t i = 1; i < r.members.size(); ++i) {
    const std::string what = name + " " + format_double(r.parameters[i - 1]) + " vs " + format_double(r.parameters[i]);
    if (increasing) check_order(r.members[i - 1], r.members[i], o, what, r.monotone);
    else check_order(r.members[i], r.members[i - 1], o, what, r.monotone);
  }
  if (r.members.size() >= 2) {
    const auto& a = r.members[r.members.size() - 2];
    const auto& b = r.members.back();
    r.converged = increasing ? sweep_cauchy(a, b, o.abs_tol) : sweep_cauchy(b, a, o.abs_tol);
  }
  r.note = r.converged ? "sweep converged" : "not yet converged";
  if (!r.monotone.ok) {
    r.note = "monotonicity violated: " + r.monotone.witness;
    if (o.throw_on_violation) throw NumericalError(name + " sweep " + r.note);
  }
}

}  // namespace

SweepResult solve_exhaustion(const Potential& V, const Measure& mu, const std::vector<double>& R_list,
                             const GridSpec& grid, const SweepOptions& opts) {
  if (R_list.empty()) throw DomainError("empty R list");
  for (std::size_t i = 1; i < R_list.size(); ++i)
    if (!(R_list[i] > R_list[i - 1])) throw DomainError("R list must increase");
  SweepResult r;
  r.parameters = R_list;
  r.members.resize(R_list.size());
  SolveOptions so = opts.solve;
  so.dirichlet = true;
  parallel_for(R_list.size(), [&](std::size_t i) {
    const GridSpec g = grid.with_half_width(R_list[i]);
    const Measure local = mu.restrict(Box::cube(grid.dim, -R_list[i], R_list[i]));
    r.members[i] = step_solve(V, g, local, grid.t_min, grid.T, so);
    r.members[i].provenance = "exhaustion R=" + format_double(R_list[i]) + " " + V.describe();
  });
  finish_sweep(r, true, opts, "exhaustion");
  return r;
}

SweepResult solve_level_truncation(const Potential& V, const Measure& mu, const std::vector<double>& k_list,
                                   const GridSpec& grid, const SweepOptions& opts) {
  if (k_list.empty()) throw DomainError("empty k list");
  for (std::size_t i = 0; i < k_list.size(); ++i)
    if (!(k_list[i] > 0.0) || (i && !(k_list[i] > k_list[i - 1]))) throw DomainError("k list must be positive and increasing");
  SweepResult r;
  r.parameters = k_list;
  r.members.resize(k_list.size());
  parallel_for(k_list.size(), [&](std::size_t i) {
    r.members[i] = step_solve(V.level_truncate(k_list[i]), grid, mu, grid.t_min, grid.T, opts.solve);
    r.members[i].provenance = "level k=" + format_double(k_list[i]) + " " + V.describe();
  });
  finish_sweep(r, false, opts, "level");
  return r;
}

SweepResult solve_time_truncation(const Potential& V, const Measure& mu, const std::vector<double>& delta_list,
                                  const GridSpec& grid, const SweepOptions& opts) {
  if (delta_list.empty()) throw DomainError("empty delta list");
  for (std::size_t i = 0; i < delta_list.size(); ++i)
    if (!(delta_list[i] > 0.0) || (i && !(delta_list[i] < delta_list[i - 1])))
      throw DomainError("delta list must be positive and decreasing");
  SweepResult r;
  r.parameters = delta_list;
  r.members.resize(delta_list.size());
  parallel_for(delta_list.size(), [&](std::size_t i) {
    r.members[i] = step_solve(V.time_truncate(delta_list[i]), grid, mu, grid.t_min, grid.T, opts.solve);
    r.members[i].provenance = "time cut delta=" + format_double(delta_list[i]) + " " + V.describe();
  });
  // Smaller delta means more absorption: members decrease along the list.
  finish_sweep(r, false, opts, "time-cut");
  return r;
}

MonotoneCheck comparison_check(const Field& u, const Measure& mu, double abs_tol, double rel_tol) {
  MonotoneCheck out;
  // Reference: the free evolution of mu on the same grid, walls, start and snapshots. The exact
  // heat potential would charge the grid's small-time tail error to the comparison.
  SolveOptions so;
  so.dirichlet = u.dirichlet;
  so.snapshots = u.times;
  const Field ref = step_solve(Potential::zero(u.grid.dim), u.grid, mu, u.times.front(), u.times.back(), so);
  for (std::size_t j = 0; j < u.times.size(); ++j) {
    const std::vector<double>& free = ref.values[j];
    double sup = 0.0;
    for (double f : free) sup = std::max(sup, f);
    for (std::size_t i = 0; i < free.size(); ++i) {
      const double v = u.values[j][i];
      if (v < 0.0 || !std::isfinite(v)) {
        out.worst = kInfinity;
        out.witness = "negative or non-finite value at t=" + format_double(u.times[j]);
        continue;
      }
      const double slack = abs_tol * sup + rel_tol * free[i];
      const double excess = v - free[i];
      if (excess > 0.0) {
        const double ratio = slack > 0.0 ? excess / slack : kInfinity;
        if (ratio > out.worst) {
          out.worst = ratio;
          out.witness = "u above H[mu] at t=" + format_double(u.times[j]) + " node " + std::to_string(i);
        }
      }
    }
  }
  out.ok = out.worst <= 1.0;
  return out;
}

// ---------------------------------------------------------------- kernel, reduce, Duhamel

KernelEstimate kernel_estimate(const Potential& V, const Point& y, const GridSpec& grid, double sigma, double k,
                               const SolveOptions& opts) {
  if (!(sigma >= 2.0 * grid.h * (1.0 - 1e-12))) throw DomainError("kernel_estimate needs sigma >= 2h");
  const double t_s = 0.5 * sigma * sigma;
  if (!(t_s < grid.T)) throw DomainError("kernel_estimate: sigma too large for the horizon");
  KernelEstimate est;
  est.source = y;
  est.sigma = sigma;
  est.R = 0.5 * (grid.b - grid.a);
  est.k = k;
  const Measure delta = Measure::dirac(grid.dim, y);
  est.field = step_solve(V.level_truncate(k), grid, delta, t_s, grid.T, opts);
  est.field.provenance = "kernel y=" + format_double(y[0]) + " sigma=" + format_double(sigma) + " " + V.describe();
  const auto cmp = comparison_check(est.field, delta);
  if (!cmp.ok) throw NumericalError("kernel estimate exceeds the free kernel: " + cmp.witness);
  for (std::size_t j = 0; j < est.field.times.size(); ++j) {
    const double t = est.field.times[j];
    const double peak = heat_kernel(Point{}, t, grid.dim);
    for (std::size_t i = 0; i < est.field.node_count(); ++i) {
      Point d = est.field.grid.node(i);
      for (int q = 0; q < grid.dim; ++q) d[q] -= y[q];
      const double H = heat_kernel(d, t, grid.dim);
      // Bulk of the kernel only: further out the grid's relative tail error exceeds 1%.
      if (H > 1e-3 * peak) est.max_ratio = std::max(est.max_ratio, est.field.values[j][i] / H);
    }
  }
  return est;
}

ReduceResult reduce(const Potential& V, const Measure& mu, const GridSpec& grid, const std::vector<double>& k_list,
                    const SweepOptions& opts, double drift_tol) {
  ReduceResult res;
  auto sweep = solve_level_truncation(V, mu, k_list, grid, opts);
  res.sweep_converged = sweep.converged;
  res.u_star = std::move(sweep.members.back());
  const double total = mu.total_mass();
  if (mu.is_zero()) {
    res.verdict = Outcome::pass;
    res.probe_times = {grid.T};
    res.probe_masses = {0.0};
    return res;
  }
  // Absorption before t_min under the limit potential.
  const double t0 = grid.t_min;
  if (const auto f = exact_layer_factor(V, t0)) {
    res.layer = *f > 0.0 ? total * (1.0 - *f) : 0.0;
  } else {
    double s = 0.0;
    bool divergent = false;
    for (const auto& a : mu.discrete_atoms()) {
      const auto tr = classification_integral(V, a.x, t0, whole_space(V.dim()));
      if (tr.divergent()) divergent = true;
      else s += a.weight * tr.value;
    }
    res.layer = divergent ? 0.0 : s;
    res.note = divergent ? "initial-layer absorption divergent; omitted" : "initial layer bounded by free evolution";
  }
  const Field& u = res.u_star;
  for (double frac : {0.25, 0.5, 1.0}) {
    const std::size_t j = u.nearest_snapshot(frac * grid.T);
    res.probe_times.push_back(u.times[j]);
    res.probe_masses.push_back(u.mass(j) + u.absorbed_mass(j) + res.layer);
  }
  std::vector<double> sorted = res.probe_masses;
  std::sort(sorted.begin(), sorted.end());
  res.m_star = sorted[1];
  const double spread = sorted.back() - sorted.front();
  res.drift = spread / std::max(std::abs(res.m_star), 0.02 * total);
  if (res.drift <= drift_tol) {
    res.verdict = Outcome::pass;
  } else {
    res.verdict = Outcome::inconclusive;
    res.note = res.drift > 0.05 ? "mass balance drift above 5%: grid too coarse" : "mass balance drift above tolerance";
  }
  return res;
}

DuhamelResult duhamel_residual(const Field& u, const Potential& V, const Measure& candidate,
                               const std::vector<Point>& xs_in, const std::vector<double>& ts_in,
                               std::optional<double> layer_mass) {
  const int n = u.grid.dim;
  if (V.dim() != n || candidate.dim() != n) throw DomainError("duhamel_residual: dimension mismatch");
  std::vector<Point> xs = xs_in;
  if (xs.empty())
    for (double x : {0.0, 0.5, 1.0}) xs.push_back(Point{x, 0.0, 0.0});
  std::vector<std::size_t> snaps;
  if (ts_in.empty()) {
    for (double frac : {0.25, 0.5, 1.0}) snaps.push_back(u.nearest_snapshot(frac * u.times.back()));
  } else {
    for (double t : ts_in) snaps.push_back(u.snapshot(t));
  }
  DuhamelResult res;
  const double hn = std::pow(u.grid.h, n);
  for (std::size_t j : snaps) {
    const double t = u.times[j];
    double sup = 0.0;
    for (const auto& x : xs) sup = std::max(sup, heat_potential(candidate, x, t));
    const double floor = std::max(1e-3 * sup, 1e-300);
    for (const auto& x : xs) {
      double duh = 0.0;
      for (std::size_t q = 1; q <= j; ++q) {
        const double s = 0.5 * (u.times[q - 1] + u.times[q]);
        const auto& A = u.absorbed[q];
        for (std::size_t i = 0; i < A.size(); ++i) {
          if (A[i] == 0.0) continue;
          Point d = u.grid.node(i);
          for (int k = 0; k < n; ++k) d[k] = x[k] - d[k];
          duh += A[i] * hn * heat_kernel(d, t - s, n);
        }
      }
      if (layer_mass) {
        const double total = u.source.total_mass();
        if (total > 0.0) duh += *layer_mass / total * heat_potential(u.source, x, t);
      } else if (u.layer_exact) {
        duh += (1.0 - u.layer_factor) * heat_potential(u.source, x, t);
      }
      const double ref = heat_potential(candidate, x, t);
      const double r = std::abs(u.at(j, x) + duh - ref) / (ref + floor);
      if (r > res.residual) {
        res.residual = r;
        res.worst_x = x;
        res.worst_t = t;
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------- weighted estimates

namespace {

/// int_0^t0 of g(s) via geometric refinement; tolerance loose enough for layer terms.
double layer_integral(const std::function<double(double)>& g, double t0) {
  TrailOptions o;
  o.rel_tol = 1e-6;
  o.max_levels = 40;
  const auto tr = time_refinement(g, t0, o);
  if (tr.divergent()) return kInfinity;
  return tr.value;
}

}  // namespace

WeightedEstimate weighted_estimate(const Potential& V, const Measure& mu, const GridSpec& grid,
                                   const SolveOptions& opts_in) {
  const int n = grid.dim;
  const double T = grid.T;
  const double hn = std::pow(grid.h, n);
  WeightedEstimate est;
  est.rhs = mT_norm(mu, T);
  std::vector<double> weight(grid.node_count());
  double total = 0.0;
  SolveOptions opts = opts_in;
  opts.observer = [&](const StepInfo& s) {
    const double tm = 0.5 * (s.t_begin + s.t_end);
    const double dt = s.t_end - s.t_begin;
    double acc = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
      const double w = std::exp(-norm2(grid.node(i), n) / (4.0 * (T - tm)));
      acc += w * (0.5 * n / T * 0.5 * (s.u_begin[i] + s.u_end[i]) * dt + s.absorbed[i]);
    }
    total += acc * hn;
  };
  step_solve(V, grid, mu, grid.t_min, T, opts);
  const auto atoms = mu.discrete_atoms();
  const auto exact = exact_layer_factor(V, grid.t_min);
  est.layer = layer_integral(
      [&](double s) {
        const double damp = exact ? std::exp(-V.time_integral(0.0, s)) : 1.0;
        if (damp == 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& a : atoms) {
          const Box win = Box::centered(n, a.x, kernel_reach(s));
          const std::vector<Focus> foci{{a.x, 0.5 * std::sqrt(s)}};
          acc += a.weight * cubature(
                                [&](const Point& x) {
                                  Point d = x;
                                  for (int k = 0; k < n; ++k) d[k] -= a.x[k];
                                  const double v = V.eval(x, s);
                                  return (0.5 * n / T + v) * heat_kernel(d, s, n) *
                                         std::exp(-norm2(x, n) / (4.0 * (T - s)));
                                },
                                win, foci);
        }
        return damp * acc;
      },
      grid.t_min);
  est.lhs = total + est.layer;
  return est;
}

WeightedEstimate bounded_domain_estimate(const Potential& V, const Measure& mu, const GridSpec& grid,
                                         const SolveOptions& opts_in) {
  const int n = grid.dim;
  const double hn = std::pow(grid.h, n);
  const WeightField psi_w = torsion_function(grid);
  const Box dom = grid.box();
  WeightedEstimate est;
  for (const auto& a : mu.discrete_atoms()) {
    if (!dom.contains(a.x)) continue;
    double d = kInfinity;
    for (int k = 0; k < n; ++k) d = std::min({d, a.x[k] - dom.lo[k], dom.hi[k] - a.x[k]});
    est.rhs += a.weight * d;
  }
  double total = 0.0;
  SolveOptions opts = opts_in;
  opts.dirichlet = true;
  opts.observer = [&](const StepInfo& s) {
    const double dt = s.t_end - s.t_begin;
    double acc = 0.0;
    for (std::size_t i = 0; i < psi_w.values.size(); ++i)
      acc += 0.5 * (s.u_begin[i] + s.u_end[i]) * dt + psi_w.values[i] * s.absorbed[i];
    total += acc * hn;
  };
  step_solve(V, grid, mu, grid.t_min, grid.T, opts);
  const auto exact = exact_layer_factor(V, grid.t_min);
  Field weight_field;
  weight_field.grid = grid;
  weight_field.values = {psi_w.values};
  // Before t_min the profile is a narrow Gaussian around each atom: freeze the weight at the atom.
  est.layer = layer_integral(
      [&](double s) {
        const double damp = exact ? std::exp(-V.time_integral(0.0, s)) : 1.0;
        if (damp == 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& a : mu.discrete_atoms())
          acc += a.weight * (gaussian_box_mass(a.x, s, dom) +
                             weight_field.at(0, a.x) * potential_kernel_integral(V, a.x, s, s, dom));
        return damp * acc;
      },
      grid.t_min);
  est.lhs = total + est.layer;
  return est;
}

}  // namespace singheat

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "singheat/classify.hpp"
#include "singheat/common.hpp"
#include "singheat/grid.hpp"
#include "singheat/measures.hpp"
#include "singheat/potentials.hpp"

namespace singheat {

/// Nodal solution snapshots on a GridSpec together with the absorbed mass density
/// int V u dt accumulated per node between consecutive snapshots.
struct Field {
  GridSpec grid;
  bool dirichlet = true;
  std::vector<double> times;                   // ascending; times[0] is the start time
  std::vector<std::vector<double>> values;     // values[j][node]
  std::vector<std::vector<double>> absorbed;   // absorbed[j][node] over (times[j-1], times[j]]; absorbed[0] = 0
  std::string provenance;
  Measure source{1};
  double layer_factor = 1.0;  // damping e^{-int_0^t0 V} applied to the starting profile
  bool layer_exact = false;   // the damping is exact (space-independent potential)

  std::size_t node_count() const { return grid.node_count(); }
  /// Index of the snapshot at time t (relative match 1e-9); throws DomainError if absent.
  std::size_t snapshot(double t) const;
  /// Index of the snapshot closest to t in log scale.
  std::size_t nearest_snapshot(double t) const;
  /// Multilinear interpolation; 0 outside the box.
  double at(std::size_t snap, const Point& x) const;
  /// sum_nodes u h^n weighted by the fraction of each node's dual cell inside `box`.
  double cell_sum(const std::vector<double>& nodal, const Box& box) const;
  double mass(std::size_t snap) const;
  /// Absorbed mass over (times[0], times[snap]].
  double absorbed_mass(std::size_t snap) const;
};

/// Data passed to a step observer after each completed time step.
struct StepInfo {
  double t_begin;
  double t_end;
  const std::vector<double>& u_begin;
  const std::vector<double>& u_end;
  const std::vector<double>& absorbed;  // per node, int V u dt over the step
};

struct SolveOptions {
  bool dirichlet = true;         // zero walls; otherwise reflecting walls
  double step_fraction = 0.01;   // dt <= step_fraction * t
  double reaction_limit = 1e3;   // subdivide while dt * max V exceeds this
  int max_subdivisions = 30;
  std::vector<double> snapshots; // empty: the grid's time nodes inside [t0, T]
  std::function<void(const StepInfo&)> observer;
};

/// Crank-Nicolson diffusion (Lie splitting across dimensions) followed by the implicit
/// reaction u <- u / (1 + dt V(t + dt)). dt <= h^2, so every substep is positivity preserving.
Field step_solve(const Potential& V, const GridSpec& grid, const std::vector<double>& init, double t0, double T,
                 const SolveOptions& opts = {});

/// Starts from the exact free profile H[mu](., t0), damped by e^{-int_0^t0 V} when V is
/// space-independent.
Field step_solve(const Potential& V, const GridSpec& grid, const Measure& mu, double t0, double T,
                 const SolveOptions& opts = {});

/// H[mu](., t0) on the nodes of grid, times `factor`; boundary nodes zeroed for Dirichlet runs.
std::vector<double> initial_profile(const GridSpec& grid, const Measure& mu, double t0, double factor,
                                    bool dirichlet);

/// e^{-int_0^t0 V} when computable exactly, else nullopt.
std::optional<double> exact_layer_factor(const Potential& V, double t0);

struct MonotoneCheck {
  bool ok = true;
  double worst = 0.0;  // largest violation divided by the allowed slack
  std::string witness;
};

struct SweepResult {
  std::vector<double> parameters;
  std::vector<Field> members;
  MonotoneCheck monotone;
  bool converged = false;  // last two members within 1% + abs_tol * sup at every node
  std::string note;
};

struct SweepOptions {
  SolveOptions solve{};
  double abs_tol = 1e-6;   // relative to the sup of the reference snapshot
  double rel_tol = 0.01;
  bool throw_on_violation = true;
};

/// Dirichlet boxes [-R, R]^n with data restricted to them; u_R must increase with R.
SweepResult solve_exhaustion(const Potential& V, const Measure& mu, const std::vector<double>& R_list,
                             const GridSpec& grid, const SweepOptions& opts = {});

/// V^k = min{V, k} for increasing k; u_k must decrease.
SweepResult solve_level_truncation(const Potential& V, const Measure& mu, const std::vector<double>& k_list,
                                   const GridSpec& grid, const SweepOptions& opts = {});

/// V_delta = V 1{t > delta} for decreasing delta; u_delta must decrease.
SweepResult solve_time_truncation(const Potential& V, const Measure& mu, const std::vector<double>& delta_list,
                                  const GridSpec& grid, const SweepOptions& opts = {});

/// 0 <= u <= H[mu] at every node and snapshot, with slack abs_tol * sup + rel_tol * H[mu]. H[mu] is
/// the free evolution on the grid of u (same walls, start time and snapshots).
MonotoneCheck comparison_check(const Field& u, const Measure& mu, double abs_tol = 1e-6, double rel_tol = 0.01);

struct KernelEstimate {
  Point source{};
  Field field;
  double sigma = 0.0;
  double R = 0.0;
  double k = 0.0;
  double max_ratio = 0.0;  // sup H_V / H over nodes where H is at least 1e-3 of its peak
};

/// H_V(., y, .) from a Gaussian of standard deviation sigma at y, i.e. the free profile at
/// time sigma^2 / 2, evolved with V^k. Throws NumericalError when H_V exceeds H beyond 1%.
KernelEstimate kernel_estimate(const Potential& V, const Point& y, const GridSpec& grid, double sigma,
                               double k = 1e6, const SolveOptions& opts = {});

struct ReduceResult {
  Field u_star;
  double m_star = 0.0;
  std::vector<double> probe_times;
  std::vector<double> probe_masses;
  double layer = 0.0;   // limit-potential absorption before t_min
  double drift = 0.0;
  bool sweep_converged = false;
  Outcome verdict = Outcome::inconclusive;
  std::string note;
};

/// Decreasing limit of the k-sweep and the total mass of the reduced measure from the balance
/// m(t) = int u*(t) + int int_{(t_min, t)} V u* + layer, required to be t-independent.
ReduceResult reduce(const Potential& V, const Measure& mu, const GridSpec& grid, const std::vector<double>& k_list,
                    const SweepOptions& opts = {}, double drift_tol = 0.02);

struct DuhamelResult {
  double residual = 0.0;
  Point worst_x{};
  double worst_t = 0.0;
};

/// max over probes of |u + Duhamel term - H[candidate]| / (H[candidate] + floor). The Duhamel
/// term convolves the recorded absorption with the free kernel (one node per snapshot interval).
/// Absorption before the first snapshot is spread like u.source: `layer_mass` when given (e.g. the
/// limit-potential layer of a reduced solution), else the field's own exact layer.
DuhamelResult duhamel_residual(const Field& u, const Potential& V, const Measure& candidate,
                               const std::vector<Point>& xs = {}, const std::vector<double>& ts = {},
                               std::optional<double> layer_mass = std::nullopt);

struct WeightedEstimate {
  double lhs = 0.0;
  double rhs = 0.0;
  double layer = 0.0;  // part of lhs from (0, t_min)
  double ratio() const { return lhs / rhs; }
};

/// int int (n/2T + V) u e^{-|x|^2 / 4(T - t)} against int e^{-|y|^2/4T} dmu.
WeightedEstimate weighted_estimate(const Potential& V, const Measure& mu, const GridSpec& grid,
                                   const SolveOptions& opts = {});

/// ||u||_{L^1} + ||V u||_{L^1} weighted by the torsion function of the grid box, against
/// int dist(y, boundary) dmu.
WeightedEstimate bounded_domain_estimate(const Potential& V, const Measure& mu, const GridSpec& grid,
                                         const SolveOptions& opts = {});

}  // namespace singheat

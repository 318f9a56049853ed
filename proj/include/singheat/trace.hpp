#pragma once

#include <string>
#include <vector>

#include "singheat/common.hpp"
#include "singheat/grid.hpp"
#include "singheat/measures.hpp"
#include "singheat/potentials.hpp"
#include "singheat/quadrature.hpp"
#include "singheat/solver.hpp"

namespace singheat {

enum class CellClass { regular, singular, inconclusive };

std::string to_string(CellClass c);

/// Evidence for one scanned cell. `trail` holds int int_{(t_l, T) x U} V u over the dyadic levels t_l.
struct CellRecord {
  Box cell;
  Point center{};
  CellClass cls = CellClass::inconclusive;
  QuadratureTrail trail;                 // at the finest cell size
  std::vector<Verdict> size_verdicts;    // one per cell size, same order as TraceOptions::cell_sizes
  std::vector<double> level_times;
  std::vector<double> level_masses;      // int_U u(., t_l)
  double mass = 0.0;                     // trace mass on regular cells
  std::string mass_method;
  double exponent = 0.0;                 // fitted d log mass / d log t over the finest levels
  bool blowup = false;                   // mass increases over the last three levels with exponent < 0
};

struct TraceOptions {
  std::vector<double> cell_sizes{0.5, 0.25};  // the last (smallest) size defines the partition
  double half_width = 2.0;                    // scanned region around the origin
  TrailOptions trail = [] {
    TrailOptions t;
    t.min_levels = 5;
    t.rel_tol = 1e-2;
    return t;
  }();
};

struct TraceReport {
  std::vector<CellRecord> cells;

  std::size_t count(CellClass c) const;
  /// Point masses at the centres of regular cells carrying the extrapolated cell masses.
  Measure regular_measure(int dim) const;
  std::vector<Box> singular_cells() const;
};

/// Direct initial-trace extraction from the snapshots of u: requires snapshots at dyadic times
/// T 2^-l (the grid ratio must be 2^(-1/m)) and a start time at most (smallest cell size)^2 / 16.
TraceReport initial_trace(const Field& u, const Potential& V, const TraceOptions& opts = {});

struct LowerBoundReport {
  bool ok = true;
  double max_excess = 0.0;  // sup (u_trace - u) / sup u, positive means violation
  double max_gap = 0.0;     // sup |u - u_trace| / sup u
  Measure trace_measure{1};
};

/// Solves with the regular trace as data and checks u >= u_trace within `tol` of sup u.
LowerBoundReport trace_lower_bound_check(const Field& u, const TraceReport& trace, const Potential& V,
                                         double tol = 0.02);

struct HarnackOptions {
  std::vector<double> xs{-1.0, -0.5, 0.0, 0.5, 1.0};  // first coordinate; other coordinates zero
  double min_time_fraction = 0.0;  // ignore snapshots before this fraction of T
  double floor = 1e-10;            // ignore values below floor * sup u
};

struct HarnackReport {
  double constant = 0.0;
  double C1 = 0.0;
  std::size_t pairs = 0;
  std::size_t rejected = 0;
  std::string witness;
  bool finite() const { return std::isfinite(constant); }
};

/// Smallest C with u(y, s) <= u(x, t) exp(C (|x - y|^2 / (t - s) + t / s + 1)) over probe pairs.
HarnackReport harnack_audit(const Field& u, double C1, const HarnackOptions& opts = {});

struct RepresentationOptions {
  Point source{};
  double sigma = 0.0;       // 0: sqrt(2 t_min), i.e. the free profile at the grid start time
  double k = 1e6;
  double train_z = 8.0;     // probes with |x - y|^2 / t below this enter the (c, gamma) regression
  double max_z = 16.0;
  double gamma_margin = 0.1;  // gamma1,2 = gamma_fit (1 +- margin)
  double log_tol = 0.02;      // slack for held-out probes, in log units
  double min_time = 0.1;    // fraction of T
  std::size_t node_stride = 5;
};

struct RepresentationReport {
  double c_fit = 0.0;
  double gamma_fit = 0.0;
  double c1 = 0.0, gamma1 = 0.0, c2 = 0.0, gamma2 = 0.0;
  bool envelope_ok = false;
  std::size_t probes = 0;
  std::size_t held_out = 0;
  std::string witness;
};

/// Fits Gaussian envelopes to e^{-psi} H_V from a kernel estimate. Envelope constants come from
/// every other probed node block; the remaining probes test them.
RepresentationReport representation_check(const Potential& V, const GridSpec& grid,
                                          const RepresentationOptions& opts = {});

struct SweepCandidateResult {
  double m_star = 0.0;
  std::vector<double> gamma;  // trace masses of min{u, u_mu*} on the report cells
  std::vector<double> mu_cells;
  bool below_candidate = true;
};

struct SweepTraceReport {
  TraceReport trace;
  std::vector<SweepCandidateResult> candidates;
  std::vector<double> nu_s;  // cellwise max over the candidate family (a finite-family lower bound)
  bool nested_monotone = true;
  bool empty_singular_set = false;
};

/// Sweeping construction on the singular cells of u. Candidates must be supported there.
SweepTraceReport sweep_trace(const Field& u, const Potential& V, const std::vector<Measure>& candidates,
                             const std::vector<double>& k_list, const TraceOptions& opts = {}, double tol = 0.02);

/// Mass of mu in a closed box (density cells by their centres).
double cell_measure(const Measure& mu, const Box& box);

}  // namespace singheat

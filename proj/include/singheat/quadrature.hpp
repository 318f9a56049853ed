#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "singheat/common.hpp"

namespace singheat {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Supported orders: 2, 3, 4, 5, 6, 8, 10, 12, 16, 20.
const GaussRule& gauss_rule(int order);

/// A point where the integrand concentrates or is singular. Cells closer than
/// `scale` to the centre are refined down to kappa * scale.
struct Focus {
  Point center{};
  double scale = 1.0;
};

struct CubatureOptions {
  int order = 0;        // 0: pick by dimension
  double kappa = 0.0;   // 0: pick by dimension
  int max_depth = 48;
};

/// Tensor Gauss-Legendre on a 2^n-tree mesh graded toward the foci: a cell is split while its
/// diameter exceeds kappa * max(distance to a focus, focus scale).
double cubature(const std::function<double(const Point&)>& f, const Box& box,
                std::span<const Focus> foci, const CubatureOptions& opts = {});

enum class Verdict { converged, divergent, inconclusive };

std::string to_string(Verdict v);

/// Evidence for an integral over (0, T] computed on geometric slabs refined toward t = 0.
/// levels[l] is the lower time limit after level l, values[l] the partial integral over
/// [levels[l], T], gaps[l] = values[l] - values[l - 1] (gaps[0] = values[0]).
struct QuadratureTrail {
  std::vector<double> levels;
  std::vector<double> values;
  std::vector<double> gaps;
  Verdict verdict = Verdict::inconclusive;
  double value = 0.0;           // extrapolated limit when converged, +inf when divergent
  double error_estimate = kInfinity;

  bool converged() const { return verdict == Verdict::converged; }
  bool divergent() const { return verdict == Verdict::divergent; }
  void write_csv(const std::string& path) const;
};

struct TrailOptions {
  double ratio = 0.5;     // slab [T r^l, T r^(l-1)]
  int max_levels = 24;    // floor t_min = T r^max_levels
  int min_levels = 6;     // no verdict before this many levels
  double rel_tol = 1e-8;  // on successive accelerated values
  double abs_tol = 1e-300;
  double eta = 0.05;      // a divergent gap exceeds eta * |I_l|
  double q_div = 0.97;    // ... and the slab ratio g_l / g_(l-1) stays above q_div
  int time_order = 6;     // Gauss nodes per slab, in log t
};

/// Decides a verdict for a monotone partial-sum sequence. Convergence is declared when the
/// last two relative changes of the geometrically accelerated values fall below rel_tol;
/// divergence when the sequence never decreased and each of the last three gaps has slab ratio
/// >= q_div and either exceeds eta * |I| or is no smaller than its predecessor. Returns
/// inconclusive when neither holds yet.
Verdict judge_sequence(std::span<const double> values, const TrailOptions& opts, double* limit,
                       double* error);

/// Builds the full trail for int_0^T g(t) dt. g may return +inf, which is treated as divergence.
QuadratureTrail time_refinement(const std::function<double(double)>& g, double T,
                                const TrailOptions& opts = {});

/// Judges a sequence that was not produced by time_refinement (e.g. psi along t_j = T 2^-j).
QuadratureTrail analyze_sequence(std::vector<double> levels, std::vector<double> values,
                                 const TrailOptions& opts = {});

}  // namespace singheat

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "singheat/common.hpp"
#include "singheat/grid.hpp"
#include "singheat/measures.hpp"
#include "singheat/potentials.hpp"
#include "singheat/quadrature.hpp"

namespace singheat {

enum class Outcome { pass, fail, divergent, inconclusive };

std::string to_string(Outcome o);

/// One evaluated probe (a point y, a radius, a lambda level...) with its evidence.
struct ProbeRecord {
  std::string label;
  Point point{};
  double value = 0.0;     // raw integral, +inf when divergent
  double weighted = 0.0;  // criterion-specific normalisation of value
  Verdict verdict = Verdict::inconclusive;
  QuadratureTrail trail;
  std::string note;
};

struct ClassificationReport {
  std::string criterion;
  std::string inputs;
  Outcome verdict = Outcome::inconclusive;
  std::vector<ProbeRecord> probes;
  std::vector<std::pair<std::string, double>> constants;
  std::string note;

  bool has(const std::string& name) const;
  /// Throws DomainError when the constant was not recorded.
  double constant(const std::string& name) const;
  void set(const std::string& name, double value);
};

struct ClassifyOptions {
  TrailOptions trail{};
  CubatureOptions cubature{};
};

/// Region meaning "all of R^n"; the Gaussian window is applied inside the integrals.
Box whole_space(int dim);

/// int_0^T int_region H(x - y, t) V(x, t) dx dt as a refinement trail.
QuadratureTrail classification_integral(const Potential& V, const Point& y, double T,
                                        const Box& region, const ClassifyOptions& opts = {});

/// int int_{(0,T) x B_R} H[mu](x, t) V(x, t) dx dt; B_R is the cube [-R, R]^n.
ClassificationReport admissibility(const Potential& V, const Measure& mu, double R, double T,
                                   const ClassifyOptions& opts = {});

/// Per-probe integral over (0,T) x B_R and the constant m_R = max_y value(y) e^{|y|^2/4T}.
ClassificationReport subcritical_check(const Potential& V, double R, double T,
                                       const std::vector<Point>& probes,
                                       const ClassifyOptions& opts = {});

struct StrongSubcriticalOptions {
  double tolerance = 1e-3;      // last scaled value must fall below this
  std::uint64_t seed = 20240607;
  int spot_cells = 4;           // cells per random union
  std::vector<double> spot_sizes{0.2, 0.1, 0.05};
  std::size_t spot_probes = 3;  // first probes used by the spot check
  ClassifyOptions classify{};
};

/// Scaled local integral e^{|y|^2/4T} lambda^-n int_0^lambda int_{cube(y, lambda^2)} V over the
/// lambda levels, plus a spot check on random unions of small cells.
ClassificationReport strong_subcritical_sufficient(const Potential& V, double T,
                                                   const std::vector<Point>& probes,
                                                   const std::vector<double>& lambda_levels,
                                                   const StrongSubcriticalOptions& opts = {});

/// Accumulated future absorption int_t^T int H(x - y, s - t) V(y, s) dy ds with its trail.
QuadratureTrail psi_trail(const Potential& V, const Point& x, double t, double T,
                          const ClassifyOptions& opts = {});

/// psi_trail collapsed to a number: the limit, or +inf when divergent. Throws NumericalError
/// when the trail is inconclusive.
double psi(const Potential& V, const Point& x, double t, double T, const ClassifyOptions& opts = {});

enum class Singularity { singular, not_singular, inconclusive };

std::string to_string(Singularity s);

struct PoleCriterionResult {
  Singularity verdict = Singularity::inconclusive;
  QuadratureTrail trail;  // psi(xi, T 2^-j) for j = 1, 2, ...
};

/// Probes whether psi(xi, t) grows without bound as t -> 0; unbounded growth means that the
/// kernel with pole xi vanishes identically.
PoleCriterionResult pole_criterion(const Potential& V, const Point& xi, double T, int levels = 24,
                                   const ClassifyOptions& opts = {});

/// Divergence verdict of int int H(x - y, t) V(y, t) per probe. Divergent probes are rechecked
/// on the cubes of half-width 1 and 0.1 around them, which must diverge as well.
ClassificationReport singular_scan(const Potential& V, double T, const std::vector<Point>& probes,
                                   const ClassifyOptions& opts = {});

/// Capacity of a compact sample set: 1 / max_E value, 0 when a sample diverges. Also compares the
/// capacity of E with the capacities of its two halves.
ClassificationReport capacity_compact(const Potential& V, double T, const std::vector<Point>& E,
                                      const ClassifyOptions& opts = {});

/// Test function f = level * 1_box on (0, T) x box.
struct TestFunction {
  std::string name;
  Box box;
  double level = 1.0;
};

/// lambda values 10^(k/500), k = -3000 .. 1500.
std::vector<double> default_lambda_sweep();

/// Dual certificates: for each shape f, the smallest lambda in the sweep with lambda * check-H[f] >= 1
/// on E bounds the capacity from above.
ClassificationReport capacity_dual_check(const Potential& V, double T, const std::vector<Point>& E,
                                         const std::vector<TestFunction>& family,
                                         const std::vector<double>& lambda_sweep = default_lambda_sweep(),
                                         const ClassifyOptions& opts = {});

/// Nodal solution of -Laplace(w) = 1 with w = 0 on the boundary of the grid box (n = 1 or 2).
struct WeightField {
  GridSpec grid;
  std::vector<double> values;
};

WeightField torsion_function(const GridSpec& grid);

}  // namespace singheat

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "singheat/common.hpp"
#include "singheat/grid.hpp"
#include "singheat/measures.hpp"
#include "singheat/potentials.hpp"

namespace singheat {

/// Everything an experiment run needs, parsed from a `key = value` file with [sections].
/// Key schema (all optional unless noted):
///
///   [problem]   dim, T, potential (catalog spec string), atom = [x1, .., xn, weight] (repeatable),
///               density_file (CSV, relative to the config file), init_exponent
///   [grid]      a, b, h, t_min, and either ratio or per_octave (ratio = 2^(-1/per_octave))
///   [probes]    point = [x1, .., xn] (repeatable), R, psi_times (list)
///   [sweeps]    R_list, k_list, delta_list, lambda_levels (comma-separated lists)
///   [kernel]    sigma (0 means max(sqrt(2 t_min), 5 h)), k
///   [trace]     cell_sizes (list), half_width, candidate = [x1, .., xn, weight] (repeatable)
///   [tolerances] monotone_abs, monotone_rel, drift, trace, residual
///   [output]    dir, seed
struct ExperimentConfig {
  std::string source;  // path of the file, or "<text>"
  std::vector<std::pair<std::string, std::string>> entries;  // "section.key" -> raw value, file order

  int dim = 1;
  double T = 1.0;
  std::string potential_spec = "zero";
  Potential potential = Potential::zero(1);
  Measure measure{1};
  double init_exponent = 0.0;  // trace runs start from t_min^-e H[mu](., t_min)

  GridSpec grid{};
  std::vector<Point> probes;
  double R = 1.0;
  std::vector<double> psi_times;

  std::vector<double> R_list;
  std::vector<double> k_list{10.0, 100.0, 1000.0};
  std::vector<double> delta_list;
  std::vector<double> lambda_levels{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};

  double sigma = 0.0;
  double kernel_k = 1e6;

  std::vector<double> cell_sizes{0.5, 0.25};
  double trace_half_width = 2.0;
  std::vector<Measure> candidates;

  double monotone_abs = 1e-6;
  double monotone_rel = 0.01;
  double drift_tol = 0.02;
  double trace_tol = 0.02;
  double residual_tol = 0.02;

  std::string output_dir = "singheat-out";
  std::uint64_t seed = 20240607;
};

/// Reads and validates a config file; relative file references resolve against its directory.
/// Throws ConfigError on any problem, before anything is written.
ExperimentConfig load_config(const std::string& path);

/// Same for in-memory text.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Parses "1, 2.5, 1e-3" (brackets optional).
std::vector<double> parse_number_list(const std::string& text);

}  // namespace singheat

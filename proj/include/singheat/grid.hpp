#pragma once

#include <cstddef>
#include <vector>

#include "singheat/common.hpp"

namespace singheat {

/// Discretisation of Q_T: the cube [a, b]^n with a uniform node spacing h, and a geometric
/// time sequence t_j = T r^(J - j) refined toward t = 0 down to t_min (which is always included).
struct GridSpec {
  int dim = 1;
  double a = -8.0;
  double b = 8.0;
  double h = 0.02;
  double T = 1.0;
  double ratio = 0.5;
  double t_min = 0.05;

  /// Throws DomainError unless h > 0, 0 < t_min < T, 0 < ratio < 1 and (b - a) / h is an integer.
  void validate() const;

  std::size_t nodes_per_dim() const;
  std::size_t node_count() const;
  double coord(std::size_t i) const { return a + static_cast<double>(i) * h; }
  Point node(std::size_t flat) const;
  Box box() const { return Box::cube(dim, a, b); }

  /// Strictly increasing: t_min, then T r^J < ... < T r < T.
  std::vector<double> time_nodes() const;

  /// Same grid on [-R, R]^n; R must be a multiple of h.
  GridSpec with_half_width(double R) const;
};

}  // namespace singheat

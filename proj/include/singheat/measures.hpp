#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "singheat/common.hpp"

namespace singheat {

struct Atom {
  Point x{};
  double weight = 0.0;
};

/// Cell-centred nonnegative density on a uniform grid with the same step in every direction.
/// Cell (i_1..i_n) covers prod_k [lo_k + i_k h, lo_k + (i_k + 1) h].
struct Density {
  int dim = 1;
  Point lo{};
  double h = 0.0;
  std::array<std::size_t, kMaxDim> count{1, 1, 1};
  std::vector<double> values;  // row-major, last coordinate fastest

  std::size_t size() const { return values.size(); }
  double cell_volume() const { return std::pow(h, dim); }
  Point cell_center(std::size_t flat) const;
  Box cell(std::size_t flat) const;

  /// Loads a CSV dump: header row, then rows `x1,...,xn,value` listing cell centres.
  static Density from_csv(const std::string& path, int dim);
};

/// Initial datum: finitely many point masses plus an optional gridded density.
/// Immutable once built; every weight and density value is finite and nonnegative.
class Measure {
 public:
  explicit Measure(int dim = 1);
  Measure(int dim, std::vector<Atom> atoms, std::optional<Density> density = std::nullopt);

  static Measure dirac(int dim, const Point& y, double weight = 1.0);
  static Measure zero(int dim) { return Measure(dim); }

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<Density>& density() const { return density_; }

  bool is_zero() const;
  double total_mass() const;

  /// Point masses with density cells folded in as midpoint atoms (weight = value * cell volume).
  std::vector<Atom> discrete_atoms() const;

  /// Smallest box containing every atom and every density cell with positive value.
  std::optional<Box> support_box() const;

  Measure restrict(const Box& box) const;
  Measure scaled(double factor) const;
  /// Sum of two measures; densities must live on the same grid.
  Measure operator+(const Measure& other) const;

 private:
  int dim_;
  std::vector<Atom> atoms_;
  std::optional<Density> density_;
};

/// int exp(-|y|^2 / 4T) d|mu|(y); atoms exactly, density by the cell-midpoint rule.
double mT_norm(const Measure& mu, double T);

}  // namespace singheat

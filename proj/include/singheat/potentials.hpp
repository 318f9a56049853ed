#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "singheat/common.hpp"

namespace singheat {

/// V = c t^-beta
struct TimePower {
  double c = 0.0;
  double beta = 0.0;
};

/// V = c |x|^-gamma
struct Hardy {
  double c = 0.0;
  double gamma = 0.0;
};

/// V = c t^-beta |x|^-gamma
struct ProductPower {
  double c = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// V = c on the box, 0 elsewhere
struct BoundedBump {
  double c = 0.0;
  Box box;
};

/// Space-time table on a regular grid, multilinear in (x, t). Zero outside the spatial hull,
/// clamped in t.
struct Tabulated {
  std::vector<std::vector<double>> axes;  // dim spatial axes followed by the time axis
  std::vector<double> values;             // row-major over axes
  std::string source;

  static Tabulated from_csv(const std::string& path, int dim);
  double eval(const Point& x, double t, int dim) const;
  double max_value() const;
};

/// Nonnegative potential V(x, t) from a closed-form catalog, optionally viewed through a
/// level cap min{V, k} and a time cut V * 1{t > delta}. The views compose: repeated caps keep
/// the smallest level, repeated cuts keep the latest time.
class Potential {
 public:
  using Kind = std::variant<TimePower, Hardy, ProductPower, BoundedBump, Tabulated>;

  Potential(int dim, Kind kind);

  static Potential zero(int dim) { return {dim, TimePower{0.0, 0.0}}; }
  static Potential time_power(int dim, double c, double beta) { return {dim, TimePower{c, beta}}; }
  static Potential hardy(int dim, double c, double gamma) { return {dim, Hardy{c, gamma}}; }
  static Potential product(int dim, double c, double beta, double gamma) {
    return {dim, ProductPower{c, beta, gamma}};
  }
  static Potential bump(int dim, double c, const Box& box) { return {dim, BoundedBump{c, box}}; }

  /// Parses `time_power(c=0.5, beta=1.0)`, `hardy(c=1, gamma=2)`, `product(c=1, beta=0.5, gamma=1)`,
  /// `bounded_bump(c=3, lo=-1, hi=1)`, `custom(file=table.csv)` or `zero`.
  static Potential parse(std::string_view spec, int dim);

  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }
  double cap() const { return cap_; }
  double cut() const { return cut_; }

  /// Exact value for catalog kinds; +infinity on the declared singular locus. Throws for t <= 0.
  double eval(const Point& x, double t) const;

  Potential level_truncate(double k) const;
  Potential time_truncate(double delta) const;

  bool is_zero() const;
  bool space_independent() const;
  /// Declared singular locus contains {x = 0}.
  bool singular_at_origin() const;
  /// Declared singular locus contains {t = 0} (unbounded as t -> 0 after the views).
  bool singular_at_t0() const;

  /// Smallest C1 with V(x,t) <= C1 / t on R^n x (0, T], when such a constant exists.
  std::optional<double> c1_bound(double T) const;

  /// int_a^b V(s) ds for space-independent potentials, exact; +infinity when divergent.
  double time_integral(double a, double b) const;

  /// Value of a space-independent potential at time t (no x needed).
  double time_profile(double t) const;

  std::string describe() const;

 private:
  double base_eval(const Point& x, double t) const;

  int dim_;
  Kind kind_;
  double cap_ = kInfinity;
  double cut_ = 0.0;
};

}  // namespace singheat

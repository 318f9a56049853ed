#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace singheat {

/// Spatial dimensions supported anywhere in the library.
inline constexpr int kMaxDim = 3;

/// A point of R^n stored in a fixed 3-slot array; unused trailing coordinates stay zero.
using Point = std::array<double, kMaxDim>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's domain (t <= 0, bad dimension, empty box...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw DomainError("spatial dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
}

inline double norm2(const Point& p, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += p[i] * p[i];
  return s;
}

inline double dist2(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Axis-aligned box prod_i [lo_i, hi_i].
struct Box {
  int dim = 1;
  Point lo{};
  Point hi{};

  static Box cube(int dim, double a, double b) {
    Box box;
    box.dim = dim;
    for (int i = 0; i < dim; ++i) {
      box.lo[i] = a;
      box.hi[i] = b;
    }
    return box;
  }

  static Box centered(int dim, const Point& c, double half_width) {
    Box box;
    box.dim = dim;
    for (int i = 0; i < dim; ++i) {
      box.lo[i] = c[i] - half_width;
      box.hi[i] = c[i] + half_width;
    }
    return box;
  }

  bool empty() const {
    for (int i = 0; i < dim; ++i)
      if (!(hi[i] > lo[i])) return true;
    return false;
  }

  bool contains(const Point& p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
    return v;
  }

  /// Squared Euclidean distance from p to the box (0 inside).
  double dist2_to(const Point& p) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      double d = 0.0;
      if (p[i] < lo[i]) d = lo[i] - p[i];
      else if (p[i] > hi[i]) d = p[i] - hi[i];
      s += d * d;
    }
    return s;
  }

  Box intersect(const Box& o) const {
    Box r = *this;
    for (int i = 0; i < dim; ++i) {
      r.lo[i] = std::max(lo[i], o.lo[i]);
      r.hi[i] = std::min(hi[i], o.hi[i]);
    }
    return r;
  }
};

/// Runs fn(i) for i in [0, n) on a pool of worker threads. Each index is handled by exactly
/// one call, so callers writing into slot i of a pre-sized vector get order-independent results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Formats a double so that it round-trips exactly; used by every CSV writer.
std::string format_double(double v);

}  // namespace singheat

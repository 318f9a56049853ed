#include "singheat/grid.hpp"

namespace singheat {

void GridSpec::validate() const {
  check_dim(dim);
  if (!(h > 0.0)) throw DomainError("grid step h must be > 0");
  if (!(b > a)) throw DomainError("grid box must satisfy a < b");
  if (!(T > 0.0)) throw DomainError("horizon T must be > 0");
  if (!(t_min > 0.0 && t_min < T)) throw DomainError("need 0 < t_min < T");
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("time ratio must lie in (0, 1)");
  const double cells = (b - a) / h;
  if (std::abs(cells - std::round(cells)) > 1e-6 * cells)
    throw DomainError("(b - a) / h must be an integer");
  if (std::round(cells) < 2) throw DomainError("grid needs at least two cells");
}

std::size_t GridSpec::nodes_per_dim() const {
  return static_cast<std::size_t>(std::llround((b - a) / h)) + 1;
}

std::size_t GridSpec::node_count() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= nodes_per_dim();
  return n;
}

Point GridSpec::node(std::size_t flat) const {
  const std::size_t m = nodes_per_dim();
  Point p{};
  for (int k = dim - 1; k >= 0; --k) {
    p[k] = coord(flat % m);
    flat /= m;
  }
  return p;
}

std::vector<double> GridSpec::time_nodes() const {
  std::vector<double> desc{T};
  // Tolerate round-off so that t_min = T r^J lands on the sequence itself.
  while (desc.back() * ratio > t_min * (1.0 + 1e-12)) desc.push_back(desc.back() * ratio);
  if (desc.back() > t_min * (1.0 + 1e-9)) desc.push_back(t_min);
  else desc.back() = t_min;
  return {desc.rbegin(), desc.rend()};
}

GridSpec GridSpec::with_half_width(double R) const {
  GridSpec g = *this;
  const double cells = R / h;
  if (std::abs(cells - std::round(cells)) > 1e-6 * std::max(1.0, cells))
    throw DomainError("exhaustion radius must be a multiple of h");
  g.a = -R;
  g.b = R;
  return g;
}

}  // namespace singheat

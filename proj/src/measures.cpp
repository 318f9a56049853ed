#include "singheat/measures.hpp"

#include <algorithm>
#include <set>

#include "csv.hpp"

namespace singheat {

namespace {

std::array<std::size_t, kMaxDim> unflatten(const Density& d, std::size_t flat) {
  std::array<std::size_t, kMaxDim> idx{0, 0, 0};
  for (int k = d.dim - 1; k >= 0; --k) {
    idx[k] = flat % d.count[k];
    flat /= d.count[k];
  }
  return idx;
}

void check_atom(const Atom& a, int dim) {
  if (!(a.weight > 0.0) || !std::isfinite(a.weight))
    throw DomainError("atom weight must be finite and > 0");
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(a.x[i])) throw DomainError("atom location must be finite");
}

}  // namespace

Point Density::cell_center(std::size_t flat) const {
  const auto idx = unflatten(*this, flat);
  Point p{};
  for (int k = 0; k < dim; ++k) p[k] = lo[k] + (static_cast<double>(idx[k]) + 0.5) * h;
  return p;
}

Box Density::cell(std::size_t flat) const {
  const Point c = cell_center(flat);
  return Box::centered(dim, c, 0.5 * h);
}

Density Density::from_csv(const std::string& path, int dim) {
  check_dim(dim);
  const auto table = csv::read_numeric(path);
  if (table.header.size() != static_cast<std::size_t>(dim + 1))
    throw ConfigError("density file '" + path + "' must have " + std::to_string(dim + 1) +
                      " columns (coordinates, value)");
  if (table.rows.empty()) throw ConfigError("density file '" + path + "' has no rows");

  std::array<std::set<double>, kMaxDim> coords;
  for (const auto& row : table.rows)
    for (int k = 0; k < dim; ++k) coords[k].insert(row[k]);

  Density d;
  d.dim = dim;
  double h = 0.0;
  for (int k = 0; k < dim; ++k) {
    const std::vector<double> c(coords[k].begin(), coords[k].end());
    d.count[k] = c.size();
    d.lo[k] = c.front();
    if (c.size() > 1) {
      const double step = c[1] - c[0];
      for (std::size_t i = 2; i < c.size(); ++i)
        if (std::abs((c[i] - c[i - 1]) - step) > 1e-9 * std::max(1.0, std::abs(step)))
          throw ConfigError("density file '" + path + "' is not on a uniform grid");
      if (h == 0.0) h = step;
      else if (std::abs(step - h) > 1e-9 * h)
        throw ConfigError("density file '" + path + "' must use one step in every direction");
    }
  }
  if (h == 0.0) throw ConfigError("density file '" + path + "' needs at least two cells per axis");
  d.h = h;
  for (int k = 0; k < dim; ++k) d.lo[k] -= 0.5 * h;

  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= d.count[k];
  d.values.assign(total, 0.0);
  for (const auto& row : table.rows) {
    std::size_t flat = 0;
    for (int k = 0; k < dim; ++k) {
      const auto i = static_cast<std::size_t>(std::llround((row[k] - d.lo[k]) / h - 0.5));
      flat = flat * d.count[k] + i;
    }
    const double v = row[dim];
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("density file '" + path + "' has a negative or non-finite value");
    d.values[flat] = v;
  }
  return d;
}

Measure::Measure(int dim) : dim_(dim) { check_dim(dim); }

Measure::Measure(int dim, std::vector<Atom> atoms, std::optional<Density> density)
    : dim_(dim), atoms_(std::move(atoms)), density_(std::move(density)) {
  check_dim(dim);
  for (const auto& a : atoms_) check_atom(a, dim_);
  if (density_) {
    if (density_->dim != dim_) throw DomainError("density dimension does not match measure");
    if (!(density_->h > 0.0)) throw DomainError("density grid step must be > 0");
    for (double v : density_->values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("density values must be finite and >= 0");
  }
}

Measure Measure::dirac(int dim, const Point& y, double weight) {
  return Measure(dim, {Atom{y, weight}});
}

bool Measure::is_zero() const { return total_mass() == 0.0; }

double Measure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  if (density_) {
    double s = 0.0;
    for (double v : density_->values) s += v;
    m += s * density_->cell_volume();
  }
  return m;
}

std::vector<Atom> Measure::discrete_atoms() const {
  std::vector<Atom> out = atoms_;
  if (density_) {
    const double vol = density_->cell_volume();
    for (std::size_t i = 0; i < density_->size(); ++i)
      if (density_->values[i] > 0.0) out.push_back({density_->cell_center(i), density_->values[i] * vol});
  }
  return out;
}

std::optional<Box> Measure::support_box() const {
  std::optional<Box> box;
  auto grow = [&](const Box& b) {
    if (!box) {
      box = b;
      return;
    }
    for (int k = 0; k < dim_; ++k) {
      box->lo[k] = std::min(box->lo[k], b.lo[k]);
      box->hi[k] = std::max(box->hi[k], b.hi[k]);
    }
  };
  for (const auto& a : atoms_) grow(Box::centered(dim_, a.x, 0.0));
  if (density_)
    for (std::size_t i = 0; i < density_->size(); ++i)
      if (density_->values[i] > 0.0) grow(density_->cell(i));
  return box;
}

Measure Measure::restrict(const Box& box) const {
  if (box.empty()) throw DomainError("restrict: box must be nonempty");
  std::vector<Atom> kept;
  for (const auto& a : atoms_)
    if (box.contains(a.x)) kept.push_back(a);
  std::optional<Density> dens = density_;
  if (dens)
    for (std::size_t i = 0; i < dens->size(); ++i)
      if (!box.contains(dens->cell_center(i))) dens->values[i] = 0.0;
  return Measure(dim_, std::move(kept), std::move(dens));
}

Measure Measure::scaled(double factor) const {
  if (!(factor >= 0.0)) throw DomainError("measure scale factor must be >= 0");
  if (factor == 0.0) return Measure(dim_);
  std::vector<Atom> atoms = atoms_;
  for (auto& a : atoms) a.weight *= factor;
  std::optional<Density> dens = density_;
  if (dens)
    for (auto& v : dens->values) v *= factor;
  return Measure(dim_, std::move(atoms), std::move(dens));
}

Measure Measure::operator+(const Measure& other) const {
  if (other.dim_ != dim_) throw DomainError("cannot add measures of different dimension");
  std::vector<Atom> atoms = atoms_;
  atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
  std::optional<Density> dens = density_;
  if (other.density_) {
    if (!dens) {
      dens = other.density_;
    } else {
      if (dens->h != other.density_->h || dens->lo != other.density_->lo ||
          dens->count != other.density_->count)
        throw DomainError("cannot add densities on different grids");
      for (std::size_t i = 0; i < dens->size(); ++i) dens->values[i] += other.density_->values[i];
    }
  }
  return Measure(dim_, std::move(atoms), std::move(dens));
}

double mT_norm(const Measure& mu, double T) {
  if (!(T > 0.0)) throw DomainError("mT_norm: T must be > 0");
  const int n = mu.dim();
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.weight * std::exp(-norm2(a.x, n) / (4.0 * T));
  if (const auto& d = mu.density()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d->size(); ++i)
      if (d->values[i] > 0.0) acc += d->values[i] * std::exp(-norm2(d->cell_center(i), n) / (4.0 * T));
    s += acc * d->cell_volume();
  }
  if (!std::isfinite(s)) throw NumericalError("measure outside M_T for T = " + format_double(T));
  return s;
}

}  // namespace singheat

#include "singheat/kernel.hpp"

#include <algorithm>

namespace singheat {

double heat_kernel(const Point& x, double t, int n) {
  if (!(t > 0.0)) throw DomainError("heat kernel needs t > 0");
  return std::pow(4.0 * kPi * t, -0.5 * n) * std::exp(-norm2(x, n) / (4.0 * t));
}

double heat_potential(const Measure& mu, const Point& x, double t) {
  if (!(t > 0.0)) throw DomainError("heat potential needs t > 0");
  const int n = mu.dim();
  const double norm = std::pow(4.0 * kPi * t, -0.5 * n);
  const double inv = 1.0 / (4.0 * t);
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.weight * std::exp(-dist2(x, a.x, n) * inv);
  if (const auto& d = mu.density()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d->size(); ++i)
      if (d->values[i] > 0.0) acc += d->values[i] * std::exp(-dist2(x, d->cell_center(i), n) * inv);
    s += acc * d->cell_volume();
  }
  return norm * s;
}

double gaussian_box_mass(const Point& y, double tau, const Box& box) {
  if (!(tau > 0.0)) throw DomainError("gaussian_box_mass needs tau > 0");
  if (box.empty()) return 0.0;
  const double scale = 1.0 / (2.0 * std::sqrt(tau));
  double m = 1.0;
  for (int k = 0; k < box.dim; ++k) {
    const double u = (box.hi[k] - y[k]) * scale;
    const double l = (box.lo[k] - y[k]) * scale;
    // Use whichever tail keeps precision.
    double f;
    if (l >= 0.0) f = 0.5 * (std::erfc(l) - std::erfc(u));
    else if (u <= 0.0) f = 0.5 * (std::erfc(-u) - std::erfc(-l));
    else f = 0.5 * (std::erf(u) - std::erf(l));
    m *= f;
  }
  return m;
}

namespace {

std::vector<Focus> potential_foci(const Potential& V, const Point& y, double tau) {
  std::vector<Focus> foci{{y, 0.5 * std::sqrt(tau)}};
  const bool radial = std::holds_alternative<Hardy>(V.kind()) || std::holds_alternative<ProductPower>(V.kind());
  if (radial) {
    double scale = 1e-4 * std::sqrt(tau);
    if (V.cap() < kInfinity) {
      // Kink of min{c |x|^-gamma, k}.
      double c = 0.0, gamma = 0.0;
      if (const auto* h = std::get_if<Hardy>(&V.kind())) {
        c = h->c;
        gamma = h->gamma;
      } else if (const auto* p = std::get_if<ProductPower>(&V.kind())) {
        c = p->c;
        gamma = p->gamma;
      }
      if (gamma > 0.0 && c > 0.0) scale = std::max(scale, 0.5 * std::pow(c / V.cap(), 1.0 / gamma));
    }
    foci.push_back({Point{}, scale});
  }
  return foci;
}

}  // namespace

double potential_kernel_integral(const Potential& V, const Point& y, double tau, double s,
                                 const Box& region, const CubatureOptions& opts) {
  if (!(tau > 0.0) || !(s > 0.0)) throw DomainError("potential_kernel_integral needs tau, s > 0");
  if (s <= V.cut() || V.is_zero()) return 0.0;
  const int n = V.dim();
  const Box window = region.intersect(Box::centered(n, y, kernel_reach(tau)));
  if (window.empty()) return 0.0;
  if (V.space_independent()) return V.time_profile(s) * gaussian_box_mass(y, tau, window);
  if (const auto* bump = std::get_if<BoundedBump>(&V.kind()))
    return std::min(bump->c, V.cap()) * gaussian_box_mass(y, tau, window.intersect(bump->box));
  const auto foci = potential_foci(V, y, tau);
  const double norm = std::pow(4.0 * kPi * tau, -0.5 * n);
  const double inv = 1.0 / (4.0 * tau);
  return cubature(
      [&](const Point& x) {
        const double v = V.eval(x, s);
        return v == 0.0 ? 0.0 : norm * std::exp(-dist2(x, y, n) * inv) * v;
      },
      window, foci, opts);
}

QuadratureTrail spacetime_integral(const SpaceTimeIntegrand& integrand, const Box& box, double T,
                                   const TrailOptions& trail, const CubatureOptions& cub) {
  if (box.empty()) throw DomainError("spacetime_integral: empty box");
  return time_refinement(
      [&](double t) {
        const std::vector<Focus> foci = integrand.foci ? integrand.foci(t) : std::vector<Focus>{};
        return cubature([&](const Point& x) { return integrand.f(x, t); }, box, foci, cub);
      },
      T, trail);
}

}  // namespace singheat

#pragma once

#include <functional>
#include <vector>

#include "singheat/common.hpp"
#include "singheat/measures.hpp"
#include "singheat/potentials.hpp"
#include "singheat/quadrature.hpp"

namespace singheat {

/// Gaussian heat kernel (4 pi t)^(-n/2) exp(-|x|^2 / 4t). Throws for t <= 0.
double heat_kernel(const Point& x, double t, int n);

/// Free evolution of mu at (x, t): atoms in closed form, density cells by the midpoint rule.
double heat_potential(const Measure& mu, const Point& x, double t);

/// int_box H(x - y, tau) dx, exact (product of error functions).
double gaussian_box_mass(const Point& y, double tau, const Box& box);

/// Half-width beyond which the Gaussian of variance 2 tau is dropped (tail below e^-36).
inline double kernel_reach(double tau) { return 12.0 * std::sqrt(tau); }

/// int_region H(x - y, tau) V(x, s) dx. Closed form for space-independent potentials and
/// bounded bumps, graded cubature otherwise.
double potential_kernel_integral(const Potential& V, const Point& y, double tau, double s,
                                 const Box& region, const CubatureOptions& opts = {});

/// Integrand f(x, t) together with the points where it concentrates at time t.
struct SpaceTimeIntegrand {
  std::function<double(const Point&, double)> f;
  std::function<std::vector<Focus>(double)> foci;
};

/// int_0^T int_box f dx dt with graded cubature in space and geometric refinement toward t = 0.
QuadratureTrail spacetime_integral(const SpaceTimeIntegrand& integrand, const Box& box, double T,
                                   const TrailOptions& trail = {}, const CubatureOptions& cub = {});

}  // namespace singheat

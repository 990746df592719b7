#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"

#include <algorithm>
#include <cmath>

namespace idp {

/// Primitive data of a state projected onto a direction n.
struct ProjectedState {
  double rho;
  double u;  // v . n
  double p;
  double c;
};

template <int dim>
ProjectedState project(const ConservedState<dim>& U, const Vec<dim>& n, const GasModel& gas) {
  if (!is_admissible<dim>(U)) throw DomainError("max_wavespeed: inadmissible input state");
  const double rho = U[0];
  const double p = pressure<dim>(U, gas);
  return {rho, momentum<dim>(U).dot(n) / rho, p, std::sqrt(gas.gamma() * p / rho)};
}

/// Two-rarefaction estimate of the intermediate pressure, clamped at zero.
/// For 1 < gamma <= 5/3 it bounds the exact star pressure from above.
inline double two_rarefaction_pressure(const ProjectedState& L, const ProjectedState& R, double gamma) {
  const double gm1 = gamma - 1.0;
  const double expo = gm1 / (2.0 * gamma);
  const double num = L.c + R.c - 0.5 * gm1 * (R.u - L.u);
  if (num <= 0.0) return 0.0;
  const double den = L.c * std::pow(L.p, -expo) + R.c * std::pow(R.p, -expo);
  return std::pow(num / den, 1.0 / expo);
}

/// Guaranteed upper bound on the largest wave speed of the 1D Riemann
/// problem (U_L, U_R) with flux f(U) n.
inline double max_wavespeed(const ProjectedState& L, const ProjectedState& R, double gamma) {
  const double p_star = two_rarefaction_pressure(L, R, gamma);
  const double factor = (gamma + 1.0) / (2.0 * gamma);
  const double lambda1 = L.u - L.c * std::sqrt(1.0 + factor * std::max((p_star - L.p) / L.p, 0.0));
  const double lambda3 = R.u + R.c * std::sqrt(1.0 + factor * std::max((p_star - R.p) / R.p, 0.0));
  return std::max({0.0, -lambda1, lambda3});
}

template <int dim>
double max_wavespeed(const Vec<dim>& n, const ConservedState<dim>& UL, const ConservedState<dim>& UR,
                     const GasModel& gas) {
  return max_wavespeed(project<dim>(UL, n, gas), project<dim>(UR, n, gas), gas.gamma());
}

}  // namespace idp

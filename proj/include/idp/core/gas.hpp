#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace idp {

/// Ideal polytropic gas with constant Newtonian viscosities and a constant
/// Prandtl number. The heat-flux coefficient kappa / c_v is derived from
/// mu and Pr, so mu is the single viscous dial.
class GasModel {
 public:
  GasModel() : GasModel(1.4, 0.0, 0.0, 0.75) {}

  GasModel(double gamma, double mu, double lambda = 0.0, double prandtl = 0.75)
      : gamma_(gamma), mu_(mu), lambda_(lambda), prandtl_(prandtl) {
    if (!(gamma > 1.0))
      throw ConfigError("gas: gamma must be > 1, got " + std::to_string(gamma));
    if (!(mu >= 0.0)) throw ConfigError("gas: mu must be >= 0");
    if (!(lambda >= 0.0)) throw ConfigError("gas: lambda must be >= 0");
    if (!(prandtl > 0.0)) throw ConfigError("gas: prandtl must be > 0");
    cv_ = 1.0 / (gamma - 1.0);
    cp_ = gamma / (gamma - 1.0);
    kappa_over_cv_ = gamma * mu / prandtl;
  }

  double gamma() const { return gamma_; }
  double mu() const { return mu_; }
  double lambda() const { return lambda_; }
  double prandtl() const { return prandtl_; }
  double cv() const { return cv_; }
  double cp() const { return cp_; }
  /// c_v^{-1} kappa = (gamma / Pr) mu.
  double kappa_over_cv() const { return kappa_over_cv_; }
  double kappa() const { return kappa_over_cv_ * cv_; }

  /// k = max(0, (d/3)(1 - 3 lambda / (2 mu))) so that
  /// s(v):grad v >= 2 mu (1 - k) |eps(v)|^2.
  double dissipation_constant(int dim) const {
    if (mu_ == 0.0) return 0.0;
    return std::max(0.0, (dim / 3.0) * (1.0 - 3.0 * lambda_ / (2.0 * mu_)));
  }

 private:
  double gamma_, mu_, lambda_, prandtl_;
  double cv_, cp_, kappa_over_cv_;
};

struct Thermodynamics {
  double e;  // specific internal energy
  double p;  // pressure
  double T;  // temperature
  double s;  // specific entropy
  double c;  // sound speed
};

template <int dim>
inline double pressure(const ConservedState<dim>& U, const GasModel& gas) {
  return (gas.gamma() - 1.0) * internal_energy_density<dim>(U);
}

/// s = ln(e^{1/(gamma-1)} / rho).
inline double specific_entropy(double rho, double e, const GasModel& gas) {
  return gas.cv() * std::log(e) - std::log(rho);
}

template <int dim>
inline Thermodynamics thermodynamics(const ConservedState<dim>& U, const GasModel& gas) {
  const double rho = U[0];
  if (!(rho > 0.0)) {
    std::ostringstream os;
    os << "thermodynamics: non-positive density rho = " << rho;
    throw DomainError(os.str());
  }
  const double e = internal_energy<dim>(U);
  if (!(e > 0.0)) {
    std::ostringstream os;
    os << "thermodynamics: non-positive internal energy e = " << e;
    throw DomainError(os.str());
  }
  const double gm1 = gas.gamma() - 1.0;
  Thermodynamics th;
  th.e = e;
  th.p = gm1 * rho * e;
  th.T = e / gas.cv();
  th.s = specific_entropy(rho, e, gas);
  th.c = std::sqrt(gas.gamma() * th.p / rho);
  return th;
}

/// Membership in the admissible set: rho > 0 and e > 0, both strict.
template <int dim>
inline bool is_admissible(const ConservedState<dim>& U) {
  if (!(U[0] > 0.0)) return false;
  const double e = internal_energy<dim>(U);
  return e > 0.0 && std::isfinite(e);
}

/// Euler flux f(U) = (m, m v^T + p I, v (E + p)).
template <int dim>
inline FluxMatrix<dim> euler_flux(const ConservedState<dim>& U, const GasModel& gas) {
  const double rho = U[0];
  const Vec<dim> m = U.template segment<dim>(1);
  const Vec<dim> v = m / rho;
  const double E = U[dim + 1];
  const double p = pressure<dim>(U, gas);
  FluxMatrix<dim> f;
  f.row(0) = m.transpose();
  f.template block<dim, dim>(1, 0) = m * v.transpose();
  for (int k = 0; k < dim; ++k) f(1 + k, k) += p;
  f.row(dim + 1) = ((E + p) * v).transpose();
  return f;
}

/// Mathematical entropy eta = rho s and its gradient with respect to U.
template <int dim>
struct EntropyPair {
  double eta;
  Vec<dim> flux;  // eta v
  ConservedState<dim> derivative;
};

template <int dim>
inline EntropyPair<dim> entropy_pair(const ConservedState<dim>& U, const GasModel& gas) {
  const double rho = U[0];
  const Vec<dim> v = velocity<dim>(U);
  const double e = internal_energy<dim>(U);
  const double s = specific_entropy(rho, e, gas);
  const double gm1 = gas.gamma() - 1.0;
  EntropyPair<dim> out;
  out.eta = rho * s;
  out.flux = out.eta * v;
  out.derivative[0] = s - gas.gamma() / gm1 + v.squaredNorm() / (2.0 * gm1 * e);
  out.derivative.template segment<dim>(1) = -v / (gm1 * e);
  out.derivative[dim + 1] = 1.0 / (gm1 * e);
  return out;
}

}  // namespace idp

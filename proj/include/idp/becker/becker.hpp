#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"
#include "idp/core/state.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace idp {

/// Viscous shock connecting (rho0, v0) upstream to (rho1, v1) downstream in the
/// frame of the shock, translated with velocity v_inf. Requires Pr = 3/4.
struct BeckerParams {
  double gamma = 1.4;
  double mu = 0.01;
  double prandtl = 0.75;
  double v0 = 1.0;
  double rho0 = 1.0;
  double M0 = 3.0;
  double v1 = 0.0;
  double v01 = 0.0;
  double m0 = 0.0;
  double v_inf = 0.0;

  /// c_v^{-1} kappa = gamma mu / Pr.
  double kappa_over_cv() const { return gamma * mu / prandtl; }
  /// Length scale (2 / (gamma + 1)) kappa / (m0 c_v) of the profile.
  double length_scale() const { return 2.0 / (gamma + 1.0) * kappa_over_cv() / m0; }
  GasModel gas() const { return GasModel(gamma, mu, 0.0, prandtl); }
};

inline BeckerParams shock_params(double gamma, double M0, double v0, double rho0, double mu = 0.01,
                                 double v_inf = 0.0) {
  if (!(M0 > 1.0)) throw ConfigError("shock_params: pre-shock Mach number must exceed 1 (got " + std::to_string(M0) + ")");
  if (!(gamma > 1.0)) throw ConfigError("shock_params: gamma must be > 1");
  if (!(v0 > 0.0) || !(rho0 > 0.0)) throw ConfigError("shock_params: v0 and rho0 must be positive");
  if (!(mu > 0.0)) throw ConfigError("shock_params: mu must be positive");
  BeckerParams p;
  p.gamma = gamma;
  p.mu = mu;
  p.v0 = v0;
  p.rho0 = rho0;
  p.M0 = M0;
  // v1 is stated for v0 = 1; the profile scales linearly with v0.
  p.v1 = v0 * (gamma - 1.0 + 2.0 / (M0 * M0)) / (gamma + 1.0);
  p.v01 = std::sqrt(v0 * p.v1);
  p.m0 = rho0 * v0;
  p.v_inf = v_inf;
  return p;
}

/// x(v): inverse of the velocity profile, strictly decreasing on (v1, v0).
inline double becker_position(double v, const BeckerParams& p) {
  const double dv = p.v0 - p.v1;
  return p.length_scale() * (p.v0 / dv * std::log((p.v0 - v) / (p.v0 - p.v01)) -
                             p.v1 / dv * std::log((v - p.v1) / (p.v01 - p.v1)));
}

inline double becker_position_derivative(double v, const BeckerParams& p) {
  const double dv = p.v0 - p.v1;
  return -p.length_scale() * (p.v0 / (dv * (p.v0 - v)) + p.v1 / (dv * (v - p.v1)));
}

struct BeckerPoint {
  double rho;
  double v;
  double e;
  /// |x(v) - x| at the returned v.
  double residual;
  int iterations;
};

/// Specific internal energy as a function of the velocity.
inline double becker_energy(double v, const BeckerParams& p) {
  return (1.0 / (2.0 * p.gamma)) * ((p.gamma + 1.0) / (p.gamma - 1.0) * p.v01 * p.v01 - v * v);
}

namespace detail {

/// x as a function of t = log(distance from v to the nearer endpoint): the
/// upstream branch (x < 0) measures w = v0 - v, the downstream branch u = v - v1.
/// In these variables the map is nearly linear and free of cancellation.
struct BeckerBranch {
  const BeckerParams& p;
  bool upstream;

  double distance_max() const { return upstream ? p.v0 - p.v01 : p.v01 - p.v1; }

  double position(double t) const {
    const double dv = p.v0 - p.v1, d = std::exp(t);
    if (upstream)
      return p.length_scale() *
             (p.v0 / dv * (t - std::log(p.v0 - p.v01)) - p.v1 / dv * std::log((dv - d) / (p.v01 - p.v1)));
    return p.length_scale() *
           (p.v0 / dv * std::log((dv - d) / (p.v0 - p.v01)) - p.v1 / dv * (t - std::log(p.v01 - p.v1)));
  }

  double slope(double t) const {
    const double dv = p.v0 - p.v1, d = std::exp(t);
    if (upstream) return p.length_scale() * (p.v0 / dv + p.v1 * d / (dv * (dv - d)));
    return -p.length_scale() * (p.v1 / dv + p.v0 * d / (dv * (dv - d)));
  }

  double velocity(double t) const { return upstream ? p.v0 - std::exp(t) : p.v1 + std::exp(t); }
};

}  // namespace detail

/// Profile in the shock frame. Safeguarded Newton in the logarithm of the
/// distance to the nearer asymptote, started at v01 (t = log of the largest
/// distance) and bracketed by [log(min normal), t_max]. Positions beyond the
/// bracket return the asymptote itself.
inline BeckerPoint becker_profile(double x, const BeckerParams& p) {
  if (!std::isfinite(x)) throw DomainError("becker_profile: non-finite position");
  BeckerPoint out{};
  if (x == 0.0) {
    out.v = p.v01;
  } else {
    const detail::BeckerBranch br{p, x < 0.0};
    // G(t) = x(t) - x is increasing in t upstream, decreasing downstream.
    const double sign = br.upstream ? 1.0 : -1.0;
    auto G = [&](double t) { return sign * (br.position(t) - x); };
    double lo = std::log(std::numeric_limits<double>::min()), hi = std::log(br.distance_max());
    double t = hi;
    double g = G(t);
    int it = 0;
    if (G(lo) >= 0.0) {
      out.v = br.upstream ? p.v0 : p.v1;
      out.rho = p.m0 / out.v;
      out.e = becker_energy(out.v, p);
      out.residual = std::abs(G(lo));
      return out;
    }
    for (; it < 200 && std::abs(g) > 1e-14 * std::max(1.0, std::abs(x)); ++it) {
      if (g > 0.0) hi = t;
      else lo = t;
      double next = t - g / (sign * br.slope(t));
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == t) break;
      t = next;
      g = G(t);
    }
    out.v = br.velocity(t);
    out.residual = std::abs(g);
    out.iterations = it;
  }
  out.rho = p.m0 / out.v;
  out.e = becker_energy(out.v, p);
  return out;
}

/// Conserved state of the translated profile at (x, t), xi = x - v_inf t.
template <int dim = 1>
ConservedState<dim> becker_state(double x, double t, const BeckerParams& p) {
  const BeckerPoint b = becker_profile(x - p.v_inf * t, p);
  Vec<dim> vel = Vec<dim>::Zero();
  vel[0] = p.v_inf + b.v;
  return from_primitive<dim>(b.rho, vel, b.e);
}

}  // namespace idp

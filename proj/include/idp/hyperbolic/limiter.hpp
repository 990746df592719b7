#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"
#include "idp/mesh/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace idp {

struct LimiterConfig {
  /// Widen the local bounds by r_i = (m_i / |Omega|)^{1.5 / d}. Off by default,
  /// in which case the minimum entropy principle holds exactly.
  bool relax_bounds = false;
  int max_line_search_iterations = 32;
  double line_search_tolerance = 1e-12;
};

struct LimiterStats {
  long edges = 0;
  long limited_edges = 0;
  double min_l = 1.0;

  void merge(const LimiterStats& o) {
    edges += o.edges;
    limited_edges += o.limited_edges;
    min_l = std::min(min_l, o.min_l);
  }
};

/// Per-node admissible window for the limited update.
struct NodalBounds {
  std::vector<double> rho_min;
  std::vector<double> rho_max;
  /// Lower bound on rho e / rho^gamma, i.e. exp((gamma - 1) s).
  std::vector<double> psi_floor;
};

template <int dim>
inline double psi_value(const ConservedState<dim>& U, double gamma) {
  return internal_energy_density<dim>(U) / std::pow(U[0], gamma);
}

/// Bounds from the bar states of the stencil and the nodal entropy floor.
template <int dim>
NodalBounds compute_local_bounds(const SolutionField<dim>& field, const DiscreteOperators<dim>& ops,
                                 const std::vector<ConservedState<dim>>& bar, const GasModel& gas,
                                 const LimiterConfig& config = {}) {
  const auto& g = ops.graph;
  const int n = g.n_rows();
  const double gamma = gas.gamma();
  std::vector<double> psi(n);
  for (int i = 0; i < n; ++i) psi[i] = psi_value<dim>(field.U[i], gamma);

  NodalBounds b;
  b.rho_min.resize(n);
  b.rho_max.resize(n);
  b.psi_floor.resize(n);
  for (int i = 0; i < n; ++i) {
    double lo = field.U[i][0], hi = lo, pf = psi[i];
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) {
      const int j = g.col(k);
      if (j == i) continue;
      lo = std::min(lo, bar[k][0]);
      hi = std::max(hi, bar[k][0]);
      pf = std::min(pf, psi[j]);
    }
    if (config.relax_bounds) {
      const double r = std::pow(ops.lumped_mass[i] / ops.measure, 1.5 / dim);
      lo *= 1.0 - r;
      hi *= 1.0 + r;
      pf *= 1.0 - r;
    }
    b.rho_min[i] = lo;
    b.rho_max[i] = hi;
    b.psi_floor[i] = pf;
  }
  return b;
}

namespace detail {

/// Largest l in [0, 1] with rho_min <= rho + l p <= rho_max.
inline double density_line_limit(double rho, double p, double rho_min, double rho_max) {
  double l = 1.0;
  if (rho + p > rho_max) l = (rho_max - rho) / p;
  else if (rho + p < rho_min) l = (rho_min - rho) / p;
  return std::clamp(l, 0.0, 1.0);
}

/// Largest feasible l in [0, l_max] with Psi(U + l P) >= 0, where
/// Psi(U) = rho e - psi_min rho^gamma is concave along the ray. Regula falsi
/// (Illinois variant) on the bracket [feasible, infeasible]; the feasible end
/// is returned.
template <int dim>
double entropy_line_limit(const ConservedState<dim>& U, const ConservedState<dim>& P, double psi_min,
                          double gamma, double l_max, const LimiterConfig& config) {
  auto Psi = [&](double l) {
    const ConservedState<dim> W = U + l * P;
    if (!(W[0] > 0.0)) return -std::numeric_limits<double>::infinity();
    return internal_energy_density<dim>(W) - psi_min * std::pow(W[0], gamma);
  };
  double a = 0.0, fa = Psi(0.0);
  if (!(fa >= 0.0)) return 0.0;
  double b = l_max, fb = Psi(b);
  if (fb >= 0.0) return l_max;
  int side = 0;
  for (int it = 0; it < config.max_line_search_iterations && b - a > config.line_search_tolerance; ++it) {
    double c = std::isfinite(fb) ? (a * fb - b * fa) / (fb - fa) : 0.5 * (a + b);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = Psi(c);
    if (fc >= 0.0) {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    } else {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    }
  }
  return a;
}

}  // namespace detail

template <int dim>
struct LimitResult {
  SolutionField<dim> field;
  std::vector<double> l;  // limiter coefficient per stencil entry
  LimiterStats stats;
};

/// Convex limiting of the antidiffusive fluxes A_ij (one per stencil entry)
/// against the low-order state uL. Rows at slip/noslip dofs are limited after
/// removing the normal momentum component, which is how the boundary
/// projection acts on the final result anyway.
template <int dim>
LimitResult<dim> convex_limit(const SolutionField<dim>& uL, const std::vector<ConservedState<dim>>& A,
                              const NodalBounds& bounds, const DiscreteOperators<dim>& ops, const GasModel& gas,
                              const LimiterConfig& config = {}) {
  const auto& g = ops.graph;
  const int n = g.n_rows();
  const double gamma = gas.gamma();

  auto projected = [&](int i, ConservedState<dim> W) {
    if (ops.bc[i] == BoundaryKind::slip || ops.bc[i] == BoundaryKind::noslip) {
      const Vec<dim>& nrm = ops.boundary_normal[i];
      const Vec<dim> m = W.template segment<dim>(1);
      W.template segment<dim>(1) = m - m.dot(nrm) * nrm;
    }
    return W;
  };

  LimitResult<dim> res;
  res.l.assign(g.n_entries(), 1.0);

  for (int i = 0; i < n; ++i) {
    if (ops.bc[i] == BoundaryKind::dirichlet) continue;
    const ConservedState<dim> Ui = projected(i, uL.U[i]);
    const double lo = bounds.rho_min[i], hi = bounds.rho_max[i];
    const double rtol = 1e-10 * hi;
    if (Ui[0] < lo - rtol || Ui[0] > hi + rtol) {
      std::ostringstream os;
      os << "convex_limit: low-order density " << Ui[0] << " at node " << i << " outside [" << lo << ", " << hi
         << "]";
      throw InvariantViolation(os.str());
    }
    const double psi_floor_term = bounds.psi_floor[i] * std::pow(Ui[0], gamma);
    const double psi_i = internal_energy_density<dim>(Ui) - psi_floor_term;
    if (psi_i < -1e-8 * psi_floor_term) {
      std::ostringstream os;
      os << "convex_limit: low-order state at node " << i << " violates the entropy floor by " << -psi_i;
      throw InvariantViolation(os.str());
    }
    const int neighbours = g.row_size(i) - 1;
    if (neighbours == 0) continue;
    const double scale = neighbours / ops.lumped_mass[i];
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) {
      if (g.col(k) == i) continue;
      const ConservedState<dim> P = projected(i, A[k]) * scale;
      const double l_rho = detail::density_line_limit(Ui[0], P[0], lo, hi);
      res.l[k] = detail::entropy_line_limit<dim>(Ui, P, bounds.psi_floor[i], gamma, l_rho, config);
    }
  }

  // Symmetrize: l_ij = min(l_ij, l_ji).
  for (int i = 0; i < n; ++i) {
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) {
      const int j = g.col(k);
      if (j <= i) continue;
      const int kt = g.transpose(k);
      const double l = std::min(res.l[k], res.l[kt]);
      res.l[k] = res.l[kt] = l;
      ++res.stats.edges;
      if (l < 1.0) ++res.stats.limited_edges;
      res.stats.min_l = std::min(res.stats.min_l, l);
    }
  }

  res.field = uL;
  for (int i = 0; i < n; ++i) {
    ConservedState<dim> acc = ConservedState<dim>::Zero();
    for (int k = g.row_begin(i); k < g.row_end(i); ++k)
      if (g.col(k) != i) acc += res.l[k] * A[k];
    res.field.U[i] += acc / ops.lumped_mass[i];
  }
  return res;
}

}  // namespace idp

#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/state.hpp"
#include "idp/mesh/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace idp {

enum class NormQuadrature {
  /// sum_i m_i |.|^q over nodes.
  lumped,
  /// Cellwise exact-for-quadratics rule applied to (P1 interpolant - exact).
  cellwise,
};

/// delta_q = rel(rho) + rel(m) + rel(E) for q in {1, 2, inf}.
struct ErrorReport {
  double delta1 = 0.0, delta2 = 0.0, deltainf = 0.0;
  /// relative[c][q]: component c in {rho, m, E}, norm q in {1, 2, inf}.
  std::array<std::array<double, 3>, 3> relative{};
  int n_nodes = 0;

  double delta(int q) const { return q == 1 ? delta1 : (q == 2 ? delta2 : deltainf); }
};

namespace detail {

template <int dim>
std::array<double, 3> split_components(const ConservedState<dim>& U) {
  return {U[0], U.template segment<dim>(1).norm(), U[dim + 1]};
}

template <int dim>
struct QuadraturePoint {
  Vec<dim> x;
  double weight;
  std::array<double, dim + 1> bary;
};

template <int dim>
std::vector<QuadraturePoint<dim>> cell_rule(const CellGeometry<dim>& cell, const std::vector<Vec<dim>>& coords) {
  std::vector<QuadraturePoint<dim>> pts;
  if constexpr (dim == 1) {
    // Three-point Gauss-Legendre on the segment.
    const double s = std::sqrt(3.0 / 5.0);
    const std::array<double, 3> xi{-s, 0.0, s};
    const std::array<double, 3> w{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int q = 0; q < 3; ++q) {
      const double l1 = 0.5 * (1.0 + xi[q]);
      QuadraturePoint<1> p;
      p.bary = {1.0 - l1, l1};
      p.x = p.bary[0] * coords[cell.dofs[0]] + p.bary[1] * coords[cell.dofs[1]];
      p.weight = 0.5 * w[q] * cell.measure;
      pts.push_back(p);
    }
  } else {
    // Edge midpoints.
    for (int a = 0; a < 3; ++a) {
      QuadraturePoint<2> p;
      p.bary = {0.5, 0.5, 0.5};
      p.bary[a] = 0.0;
      p.x = Vec<2>::Zero();
      for (int b = 0; b < 3; ++b) p.x += p.bary[b] * coords[cell.dofs[b]];
      p.weight = cell.measure / 3.0;
      pts.push_back(p);
    }
  }
  return pts;
}

}  // namespace detail

/// Consolidated relative error of `numerical` against `exact` (sampled at the
/// dof coordinates, or at quadrature points for the cellwise rule). Cellwise
/// quadrature is only meaningful on meshes without periodic identification.
template <int dim>
ErrorReport compute_errors(const SolutionField<dim>& numerical, const DiscreteOperators<dim>& ops,
                           const std::function<ConservedState<dim>(const Vec<dim>&)>& exact,
                           NormQuadrature quadrature = NormQuadrature::lumped) {
  const int n = ops.n_dofs();
  std::array<std::array<double, 3>, 3> err{}, ref{};  // [component][q]
  auto accumulate = [&](const ConservedState<dim>& num, const ConservedState<dim>& ex, double w) {
    const auto e = detail::split_components<dim>(ConservedState<dim>(num - ex));
    const auto r = detail::split_components<dim>(ex);
    for (int c = 0; c < 3; ++c) {
      const double ae = std::abs(e[c]), ar = std::abs(r[c]);
      err[c][0] += w * ae;
      err[c][1] += w * ae * ae;
      ref[c][0] += w * ar;
      ref[c][1] += w * ar * ar;
    }
  };

  std::vector<ConservedState<dim>> nodal_exact(n);
  for (int i = 0; i < n; ++i) nodal_exact[i] = exact(ops.coordinates[i]);

  if (quadrature == NormQuadrature::lumped) {
    for (int i = 0; i < n; ++i) accumulate(numerical.U[i], nodal_exact[i], ops.lumped_mass[i]);
  } else {
    for (const auto& cell : ops.cells) {
      for (const auto& qp : detail::cell_rule(cell, ops.coordinates)) {
        ConservedState<dim> uh = ConservedState<dim>::Zero();
        for (int a = 0; a <= dim; ++a) uh += qp.bary[a] * numerical.U[cell.dofs[a]];
        accumulate(uh, exact(qp.x), qp.weight);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const auto e = detail::split_components<dim>(ConservedState<dim>(numerical.U[i] - nodal_exact[i]));
    const auto r = detail::split_components<dim>(nodal_exact[i]);
    for (int c = 0; c < 3; ++c) {
      err[c][2] = std::max(err[c][2], std::abs(e[c]));
      ref[c][2] = std::max(ref[c][2], std::abs(r[c]));
    }
  }

  ErrorReport rep;
  rep.n_nodes = n;
  static const char* names[3] = {"density", "momentum", "total energy"};
  for (int c = 0; c < 3; ++c) {
    for (int q = 0; q < 3; ++q) {
      double e = err[c][q], r = ref[c][q];
      if (q == 1) {
        e = std::sqrt(e);
        r = std::sqrt(r);
      }
      if (!(r > 0.0)) throw DomainError(std::string("compute_errors: exact ") + names[c] + " has zero norm");
      rep.relative[c][q] = e / r;
    }
  }
  rep.delta1 = rep.relative[0][0] + rep.relative[1][0] + rep.relative[2][0];
  rep.delta2 = rep.relative[0][1] + rep.relative[1][1] + rep.relative[2][1];
  rep.deltainf = rep.relative[0][2] + rep.relative[1][2] + rep.relative[2][2];
  return rep;
}

}  // namespace idp

#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"
#include "idp/mesh/mesh.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <vector>

namespace idp {

/// Per-cell geometry of a P1 simplex: dofs, constant basis gradients, measure.
template <int dim>
struct CellGeometry {
  std::array<int, dim + 1> dofs;
  std::array<Vec<dim>, dim + 1> grad;
  double measure;
};

struct AssemblyOptions {
  /// Error out if an off-diagonal stiffness coefficient is positive (non-acute mesh).
  bool strict_acute = false;
  bool warn = true;
};

/// All matrices shared by the hyperbolic and parabolic substeps, stored on
/// the stencil graph (entry k of the graph is the pair (i, graph.col(k))).
template <int dim>
struct DiscreteOperators {
  SparsityGraph graph;
  std::vector<double> lumped_mass;            // m_i
  std::vector<double> mass;                   // m_ij
  std::vector<Vec<dim>> c;                    // c_ij = int phi_i grad phi_j
  std::vector<double> c_norm;                 // |c_ij|
  std::vector<Vec<dim>> n;                    // c_ij / |c_ij| (zero when c_ij = 0)
  std::vector<double> beta;                   // (kappa/c_v) int grad phi_j . grad phi_i
  std::vector<Tensor<dim>> B;                 // viscous d x d blocks
  std::vector<Vec<dim>> boundary_normal;      // unit outward lumped normal, zero inside
  std::vector<BoundaryKind> bc;
  std::vector<CellGeometry<dim>> cells;
  std::vector<Vec<dim>> coordinates;          // dof coordinates
  double measure = 0.0;
  double max_offdiag_stiffness = 0.0;         // max_{i != j} int grad phi_i . grad phi_j
  int n_positive_offdiag = 0;

  int n_dofs() const { return graph.n_rows(); }
};

namespace detail {

template <int dim>
CellGeometry<dim> cell_geometry(const MeshTopology<dim>& mesh, int cell_index, double degenerate_tol) {
  const auto& cell = mesh.cells()[cell_index];
  CellGeometry<dim> g;
  for (int a = 0; a <= dim; ++a) g.dofs[a] = mesh.dof_of_node(cell[a]);
  const auto& x = mesh.nodes();
  if constexpr (dim == 1) {
    const double L = x[cell[1]][0] - x[cell[0]][0];
    g.measure = std::abs(L);
    if (g.measure <= degenerate_tol)
      throw AssemblyError("zero-measure cell " + std::to_string(cell_index));
    g.grad[0][0] = -1.0 / L;
    g.grad[1][0] = 1.0 / L;
  } else {
    Tensor<2> J;
    J.col(0) = x[cell[1]] - x[cell[0]];
    J.col(1) = x[cell[2]] - x[cell[0]];
    const double det = J.determinant();
    g.measure = 0.5 * std::abs(det);
    if (g.measure <= degenerate_tol)
      throw AssemblyError("zero-area cell " + std::to_string(cell_index));
    const Tensor<2> JinvT = J.inverse().transpose();
    g.grad[1] = JinvT.col(0);
    g.grad[2] = JinvT.col(1);
    g.grad[0] = -g.grad[1] - g.grad[2];
  }
  return g;
}

}  // namespace detail

/// (B_ij)_kl = a(phi_j e_l, phi_i e_k) restricted to one cell with constant
/// gradients g_i, g_j.
template <int dim>
Tensor<dim> viscous_block(const Vec<dim>& gi, const Vec<dim>& gj, double measure, const GasModel& gas) {
  const double mu = gas.mu();
  const double lam = gas.lambda() - 2.0 / 3.0 * mu;
  Tensor<dim> Bij = mu * gi.dot(gj) * Tensor<dim>::Identity() + mu * gj * gi.transpose() +
                    lam * gi * gj.transpose();
  return measure * Bij;
}

/// Exact P1 assembly of m_i, m_ij, c_ij, beta_ij and B_ij.
template <int dim>
DiscreteOperators<dim> assemble_operators(const MeshTopology<dim>& mesh, const GasModel& gas,
                                          const AssemblyOptions& options = {}) {
  if (!mesh.finalized()) throw AssemblyError("assemble_operators: mesh topology not finalized");
  DiscreteOperators<dim> ops;
  ops.graph = mesh.graph();
  const int n = ops.graph.n_rows();
  const int nnz = ops.graph.n_entries();
  ops.lumped_mass.assign(n, 0.0);
  ops.mass.assign(nnz, 0.0);
  ops.c.assign(nnz, Vec<dim>::Zero());
  ops.beta.assign(nnz, 0.0);
  ops.B.assign(nnz, Tensor<dim>::Zero());
  std::vector<double> stiffness(nnz, 0.0);
  std::vector<Vec<dim>> grad_integral(n, Vec<dim>::Zero());

  const double diam = mesh.bounding_box_diameter();
  const double degenerate_tol = 1e-14 * std::pow(diam, dim);
  const double kc = gas.kappa_over_cv();
  constexpr double lump = 1.0 / (dim + 1);
  constexpr double mass_scale = 1.0 / ((dim + 1) * (dim + 2));

  ops.cells.reserve(mesh.n_cells());
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    auto geo = detail::cell_geometry(mesh, ci, degenerate_tol);
    ops.measure += geo.measure;
    for (int a = 0; a <= dim; ++a) {
      const int i = geo.dofs[a];
      ops.lumped_mass[i] += geo.measure * lump;
      grad_integral[i] += geo.measure * geo.grad[a];
      for (int b = 0; b <= dim; ++b) {
        const int j = geo.dofs[b];
        const int k = ops.graph.find(i, j);
        ops.mass[k] += geo.measure * mass_scale * (a == b ? 2.0 : 1.0);
        ops.c[k] += geo.measure * lump * geo.grad[b];
        const double s = geo.measure * geo.grad[a].dot(geo.grad[b]);
        stiffness[k] += s;
        ops.beta[k] += kc * s;
        ops.B[k] += viscous_block<dim>(geo.grad[a], geo.grad[b], geo.measure, gas);
      }
    }
    ops.cells.push_back(geo);
  }

  ops.c_norm.resize(nnz);
  ops.n.resize(nnz);
  for (int k = 0; k < nnz; ++k) {
    ops.c_norm[k] = ops.c[k].norm();
    ops.n[k] = ops.c_norm[k] > 0.0 ? Vec<dim>(ops.c[k] / ops.c_norm[k]) : Vec<dim>::Zero();
  }

  ops.bc = mesh.boundary_kinds();
  ops.boundary_normal.assign(n, Vec<dim>::Zero());
  ops.coordinates.resize(n);
  for (int i = 0; i < n; ++i) {
    ops.coordinates[i] = mesh.dof_coordinates(i);
    if (mesh.is_boundary(i) && grad_integral[i].norm() > 0.0)
      ops.boundary_normal[i] = grad_integral[i].normalized();
  }

  ops.max_offdiag_stiffness = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double scale = std::abs(stiffness[ops.graph.diag(i)]);
    for (int k = ops.graph.row_begin(i); k < ops.graph.row_end(i); ++k) {
      if (ops.graph.col(k) == i) continue;
      ops.max_offdiag_stiffness = std::max(ops.max_offdiag_stiffness, stiffness[k]);
      if (stiffness[k] > 1e-10 * scale) ++ops.n_positive_offdiag;
    }
  }
  if (ops.n_positive_offdiag > 0) {
    std::ostringstream os;
    os << "assemble_operators: " << ops.n_positive_offdiag
       << " positive off-diagonal stiffness entries (non-acute mesh), max = " << ops.max_offdiag_stiffness;
    if (options.strict_acute) throw AssemblyError(os.str());
    if (options.warn) std::cerr << "warning: " << os.str() << '\n';
  }
  return ops;
}

}  // namespace idp

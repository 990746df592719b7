#pragma once

#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"
#include "idp/mesh/mesh.hpp"
#include "idp/mesh/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace idp {

/// Writes `content` to `path` through a temporary file and a rename, so a
/// reader never sees a partially written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

/// Lumped gradient g_i = |sum_j c_ij rho_j| / m_i.
template <int dim>
std::vector<double> density_gradient_magnitude(const SolutionField<dim>& f, const DiscreteOperators<dim>& ops) {
  const auto& g = ops.graph;
  std::vector<double> out(g.n_rows());
  for (int i = 0; i < g.n_rows(); ++i) {
    Vec<dim> s = Vec<dim>::Zero();
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) s += ops.c[k] * f.U[g.col(k)][0];
    out[i] = s.norm() / ops.lumped_mass[i];
  }
  return out;
}

/// Contrast map exp(-10 (g - g_min) / (g_max - g_min)); identically 1 when g is constant.
inline std::vector<double> schlieren(const std::vector<double>& g) {
  if (g.empty()) return {};
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  const double range = *hi - *lo;
  std::vector<double> out(g.size(), 1.0);
  if (range > 0.0)
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::exp(-10.0 * (g[i] - *lo) / range);
  return out;
}

/// Legacy ASCII VTK unstructured grid with nodal point data. Periodic copies
/// of a dof are written as separate points carrying the same values.
template <int dim>
std::string vtk_string(const MeshTopology<dim>& mesh, const DiscreteOperators<dim>& ops, const SolutionField<dim>& f,
                       const GasModel& gas) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\n";
  os << "density at t = " << f.time << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& x : mesh.nodes()) os << x[0] << ' ' << (dim > 1 ? x[dim - 1] : 0.0) << " 0\n";
  const int npc = dim + 1;
  os << "CELLS " << mesh.n_cells() << ' ' << mesh.n_cells() * (npc + 1) << '\n';
  for (const auto& c : mesh.cells()) {
    os << npc;
    for (int a : c) os << ' ' << a;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) os << (dim == 1 ? 3 : 5) << '\n';

  const auto grad = density_gradient_magnitude(f, ops);
  const auto schl = schlieren(grad);
  auto scalar = [&](const char* name, auto value) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) os << value(mesh.dof_of_node(i)) << '\n';
  };
  os << "POINT_DATA " << mesh.n_nodes() << '\n';
  scalar("density", [&](int d) { return f.U[d][0]; });
  scalar("pressure", [&](int d) { return pressure<dim>(f.U[d], gas); });
  scalar("internal_energy", [&](int d) { return internal_energy<dim>(f.U[d]); });
  scalar("density_gradient", [&](int d) { return grad[d]; });
  scalar("schlieren", [&](int d) { return schl[d]; });
  os << "VECTORS velocity double\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const Vec<dim> v = velocity<dim>(f.U[mesh.dof_of_node(i)]);
    os << v[0] << ' ' << (dim > 1 ? v[dim - 1] : 0.0) << " 0\n";
  }
  return os.str();
}

template <int dim>
void write_vtk(const std::string& path, const MeshTopology<dim>& mesh, const DiscreteOperators<dim>& ops,
               const SolutionField<dim>& f, const GasModel& gas) {
  write_file_atomic(path, vtk_string(mesh, ops, f, gas));
}

/// Nodal CSV dump: x[, y], rho, m..., E, p.
template <int dim>
std::string field_csv(const DiscreteOperators<dim>& ops, const SolutionField<dim>& f, const GasModel& gas) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << (dim == 1 ? "x" : "x,y") << ",rho," << (dim == 1 ? "m" : "mx,my") << ",E,p\n";
  for (int i = 0; i < ops.n_dofs(); ++i) {
    for (int d = 0; d < dim; ++d) os << ops.coordinates[i][d] << ',';
    for (int c = 0; c < dim + 2; ++c) os << f.U[i][c] << ',';
    os << pressure<dim>(f.U[i], gas) << '\n';
  }
  return os.str();
}

}  // namespace idp

#pragma once

#include "idp/becker/becker.hpp"
#include "idp/core/boundary.hpp"
#include "idp/driver/strang.hpp"
#include "idp/harness/config.hpp"
#include "idp/mesh/mesh.hpp"
#include "idp/mesh/mesh_io.hpp"
#include "idp/mesh/operators.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace idp {

/// A fully assembled problem: mesh, operators, gas, initial data, boundary
/// data and, when available, the exact solution.
template <int dim>
struct CaseSetup {
  std::string name;
  MeshTopology<dim> mesh;
  GasModel gas;
  DiscreteOperators<dim> ops;
  SolutionField<dim> initial;
  BoundaryData<dim> boundary;
  std::function<ConservedState<dim>(const Vec<dim>&, double)> exact;
  TimeControls controls;
  StepConfig step;
  std::vector<double> snapshots;
  /// Grid size parameter reported in convergence tables (nodes).
  int size_parameter = 0;
};

inline int case_dimension(const std::string& name) {
  if (name == "becker1d" || name == "sod1d") return 1;
  if (name == "becker2d" || name == "shocktube2d") return 2;
  throw ConfigError("unknown case '" + name + "' (expected becker1d, becker2d, sod1d or shocktube2d)");
}

inline BeckerParams becker_params(const RunConfig& c) {
  const double gamma = c.gamma.value_or(1.4);
  const double prandtl = c.prandtl.value_or(0.75);
  if (std::abs(prandtl - 0.75) > 1e-15) throw ConfigError(c.source + ": becker cases require gas.prandtl = 0.75");
  if (c.lambda.value_or(0.0) != 0.0) throw ConfigError(c.source + ": becker cases require gas.lambda = 0");
  return shock_params(gamma, c.mach.value_or(3.0), c.v0.value_or(1.0), c.rho0.value_or(1.0), c.mu.value_or(0.01),
                      c.v_inf.value_or(0.2));
}

namespace detail {

template <int dim>
void finish_case(CaseSetup<dim>& s, const RunConfig& c, double default_cfl, double default_t_final) {
  AssemblyOptions opt;
  opt.strict_acute = c.strict_acute;
  s.ops = assemble_operators(s.mesh, s.gas, opt);
  s.controls.cfl = c.cfl.value_or(default_cfl);
  s.controls.t_final = c.t_final.value_or(default_t_final);
  s.controls.max_steps = c.max_steps;
  s.controls.audit_every = c.audit_every;
  s.step.hyperbolic.high_order = c.high_order;
  s.step.hyperbolic.limit = c.limit;
  s.step.hyperbolic.limiter.relax_bounds = c.relax_bounds;
  s.step.hyperbolic.pairing = c.indicator_pairing == "mean" ? IndicatorPairing::mean : IndicatorPairing::max;
  s.step.parabolic.cg.tol = c.cg_tol;
  s.step.parabolic.floor =
      c.energy_floor == "dissipation_shifted" ? EnergyFloor::dissipation_shifted : EnergyFloor::previous_minimum;
  if (c.snapshots) s.snapshots = *c.snapshots;
  s.initial.U.resize(s.ops.n_dofs());
  s.initial.time = 0.0;
}

}  // namespace detail

/// Becker shock on [-1, 1.5] with dirichlet data on both ends.
inline CaseSetup<1> make_becker1d(const RunConfig& c) {
  const BeckerParams p = becker_params(c);
  CaseSetup<1> s;
  s.name = "becker1d";
  s.mesh = uniform_1d(-1.0, 1.5, c.n.value_or(100));
  s.gas = p.gas();
  s.mesh.finalize(BoundaryKind::dirichlet);
  detail::finish_case(s, c, 0.4, 3.0);
  s.exact = [p](const Vec<1>& x, double t) { return becker_state<1>(x[0], t, p); };
  for (int i = 0; i < s.ops.n_dofs(); ++i) s.initial.U[i] = s.exact(s.ops.coordinates[i], 0.0);
  s.boundary.dirichlet = s.exact;
  s.size_parameter = s.ops.n_dofs();
  return s;
}

/// Becker shock on (-0.5, 1) x (0, 1), dirichlet on x = -0.5 and x = 1,
/// periodic in y. Uses an imported mesh when mesh.file is set.
inline CaseSetup<2> make_becker2d(const RunConfig& c) {
  const BeckerParams p = becker_params(c);
  auto topo = [&]() {
    if (c.mesh_file) return import_mesh<2>(*c.mesh_file, BoundaryKind::dirichlet);
    const int ny = c.ny.value_or(20);
    const int nx = c.nx.value_or(static_cast<int>(std::lround(1.5 * ny)));
    auto m = structured_tri_2d(-0.5, 1.0, 0.0, 1.0, nx, ny,
                               c.pattern == "uniform" ? DiagonalPattern::uniform : DiagonalPattern::alternating,
                               true);
    m.finalize(BoundaryKind::dirichlet);
    return m;
  }();
  CaseSetup<2> s;
  s.name = "becker2d";
  s.mesh = std::move(topo);
  s.gas = p.gas();
  detail::finish_case(s, c, 0.4, 3.0);
  s.exact = [p](const Vec<2>& x, double t) { return becker_state<2>(x[0], t, p); };
  for (int i = 0; i < s.ops.n_dofs(); ++i) s.initial.U[i] = s.exact(s.ops.coordinates[i], 0.0);
  s.boundary.dirichlet = s.exact;
  s.size_parameter = s.mesh.n_nodes();
  return s;
}

/// Viscous Sod tube on [0, 1]; the end states are held fixed.
inline CaseSetup<1> make_sod1d(const RunConfig& c) {
  const GasModel gas(c.gamma.value_or(1.4), c.mu.value_or(1e-3), c.lambda.value_or(0.0), c.prandtl.value_or(0.75));
  CaseSetup<1> s;
  s.name = "sod1d";
  s.mesh = uniform_1d(0.0, 1.0, c.n.value_or(400));
  s.gas = gas;
  s.mesh.finalize(BoundaryKind::dirichlet);
  detail::finish_case(s, c, 0.4, 0.2);
  const double gm1 = gas.gamma() - 1.0;
  const auto left = from_primitive<1>(1.0, Vec<1>::Zero(), 1.0 / (gm1 * 1.0));
  const auto right = from_primitive<1>(0.125, Vec<1>::Zero(), 0.1 / (gm1 * 0.125));
  for (int i = 0; i < s.ops.n_dofs(); ++i) {
    const double x = s.ops.coordinates[i][0];
    s.initial.U[i] = x < 0.5 ? left : (x > 0.5 ? right : ConservedState<1>(0.5 * (left + right)));
  }
  s.size_parameter = s.ops.n_dofs();
  return s;
}

/// Shock/boundary-layer interaction in the half tube (0, 1) x (0, 1/2):
/// noslip walls, slip symmetry line y = 1/2.
inline CaseSetup<2> make_shocktube2d(const RunConfig& c) {
  const GasModel gas(c.gamma.value_or(1.4), c.mu.value_or(1e-3), c.lambda.value_or(0.0), c.prandtl.value_or(0.73));
  auto topo = [&]() {
    if (c.mesh_file) {
      std::ifstream in(*c.mesh_file);
      if (!in) throw MeshError("cannot open mesh file '" + *c.mesh_file + "'");
      auto m = read_mesh<2>(in, *c.mesh_file);
      m.set_kind_where([](const Vec<2>& x) { return std::abs(x[1] - 0.5) < 1e-12; }, BoundaryKind::slip);
      m.finalize(BoundaryKind::noslip);
      return m;
    }
    const int ny = c.ny.value_or(25);
    const int nx = c.nx.value_or(2 * ny);
    auto m = structured_tri_2d(0.0, 1.0, 0.0, 0.5, nx, ny,
                               c.pattern == "uniform" ? DiagonalPattern::uniform : DiagonalPattern::alternating);
    m.set_kind_where([](const Vec<2>& x) { return std::abs(x[1] - 0.5) < 1e-12; }, BoundaryKind::slip);
    m.finalize(BoundaryKind::noslip);
    return m;
  }();
  CaseSetup<2> s;
  s.name = "shocktube2d";
  s.mesh = std::move(topo);
  s.gas = gas;
  detail::finish_case(s, c, 0.4, 1.0);
  if (!c.snapshots) s.snapshots = {0.6, 0.8, 1.0};
  const double g = gas.gamma();
  const auto state = [&](double rho) { return from_primitive<2>(rho, Vec<2>::Zero(), (rho / g) / ((g - 1.0) * rho)); };
  const auto left = state(120.0), right = state(1.2);
  for (int i = 0; i < s.ops.n_dofs(); ++i) {
    const double x = s.ops.coordinates[i][0];
    s.initial.U[i] = x < 0.5 ? left : (x > 0.5 ? right : ConservedState<2>(0.5 * (left + right)));
  }
  s.size_parameter = s.mesh.n_nodes();
  return s;
}

}  // namespace idp

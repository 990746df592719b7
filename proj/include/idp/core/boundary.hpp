#pragma once

#include "idp/core/state.hpp"

#include <functional>
#include <vector>

namespace idp {

/// Time-dependent data attached to a simulation: Dirichlet states and the
/// external body force f(x, t).
template <int dim>
struct BoundaryData {
  using StateFunction = std::function<ConservedState<dim>(const Vec<dim>&, double)>;
  using ForceFunction = std::function<Vec<dim>(const Vec<dim>&, double)>;

  /// Prescribed conserved state at dirichlet dofs. When empty, dirichlet
  /// dofs keep the value they held at the start of the simulation.
  StateFunction dirichlet;
  ForceFunction force;
  /// Filled by the driver from the initial field when `dirichlet` is empty.
  std::vector<ConservedState<dim>> frozen;

  ConservedState<dim> dirichlet_state(int dof, const Vec<dim>& x, double t) const {
    if (dirichlet) return dirichlet(x, t);
    return frozen.at(dof);
  }

  Vec<dim> force_at(const Vec<dim>& x, double t) const {
    return force ? force(x, t) : Vec<dim>::Zero();
  }
};

}  // namespace idp

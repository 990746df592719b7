#pragma once

#include <Eigen/Core>

#include <vector>

namespace idp {

template <int dim>
using Vec = Eigen::Matrix<double, dim, 1>;

template <int dim>
using Tensor = Eigen::Matrix<double, dim, dim>;

/// Conserved variables (rho, m_1..m_dim, E) stored as one column vector.
template <int dim>
using ConservedState = Eigen::Matrix<double, dim + 2, 1>;

/// Euler flux f(U), one column per spatial direction.
template <int dim>
using FluxMatrix = Eigen::Matrix<double, dim + 2, dim>;

template <int dim>
inline double density(const ConservedState<dim>& U) {
  return U[0];
}

template <int dim>
inline Vec<dim> momentum(const ConservedState<dim>& U) {
  return U.template segment<dim>(1);
}

template <int dim>
inline double total_energy(const ConservedState<dim>& U) {
  return U[dim + 1];
}

template <int dim>
inline Vec<dim> velocity(const ConservedState<dim>& U) {
  return momentum<dim>(U) / U[0];
}

/// Specific internal energy e = E/rho - |m|^2 / (2 rho^2). Meaningless for rho <= 0.
template <int dim>
inline double internal_energy(const ConservedState<dim>& U) {
  const double rho = U[0];
  const Vec<dim> m = U.template segment<dim>(1);
  return U[dim + 1] / rho - 0.5 * m.squaredNorm() / (rho * rho);
}

/// rho * e, written without dividing twice by rho.
template <int dim>
inline double internal_energy_density(const ConservedState<dim>& U) {
  const Vec<dim> m = U.template segment<dim>(1);
  return U[dim + 1] - 0.5 * m.squaredNorm() / U[0];
}

/// Assemble (rho, rho v, rho e + rho |v|^2 / 2).
template <int dim>
inline ConservedState<dim> from_primitive(double rho, const Vec<dim>& v, double e) {
  ConservedState<dim> U;
  U[0] = rho;
  U.template segment<dim>(1) = rho * v;
  U[dim + 1] = rho * e + 0.5 * rho * v.squaredNorm();
  return U;
}

template <int dim>
struct SolutionField {
  std::vector<ConservedState<dim>> U;
  double time = 0.0;

  std::size_t size() const { return U.size(); }
};

}  // namespace idp

#pragma once

#include "idp/core/boundary.hpp"
#include "idp/core/errors.hpp"
#include "idp/core/gas.hpp"
#include "idp/mesh/operators.hpp"
#include "idp/parabolic/cg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

// Implicit viscous/heat-conduction substep with frozen density.

namespace idp {

template <int dim>
using VelocityField = std::vector<Vec<dim>>;

template <int dim>
struct VelocityUpdate {
  VelocityField<dim> v_half;
  VelocityField<dim> v_new;
  /// -2 sum_i V_half_i . R_i over constrained rows, R = b - A V_half. This is the
  /// work done by prescribed boundary velocities; zero for slip/noslip rows.
  double boundary_work = 0.0;
  int iterations = 0;
  double relative_residual = 0.0;
};

namespace detail {

/// Projector onto the free velocity directions of dof i.
template <int dim>
Tensor<dim> velocity_projector(const DiscreteOperators<dim>& ops, int i) {
  switch (ops.bc[i]) {
    case BoundaryKind::interior:
      return Tensor<dim>::Identity();
    case BoundaryKind::slip: {
      const Vec<dim>& n = ops.boundary_normal[i];
      return Tensor<dim>::Identity() - n * n.transpose();
    }
    default:
      return Tensor<dim>::Zero();
  }
}

template <int dim>
Eigen::VectorXd flatten(const VelocityField<dim>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()) * dim);
  for (std::size_t i = 0; i < v.size(); ++i) out.template segment<dim>(dim * i) = v[i];
  return out;
}

template <int dim>
VelocityField<dim> unflatten(const Eigen::VectorXd& x) {
  VelocityField<dim> v(x.size() / dim);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.template segment<dim>(dim * i);
  return v;
}

}  // namespace detail

/// Crank-Nicolson half-step velocity:
///   rho_i m_i V_i + dt/2 sum_j B_ij V_j = m_i M_i + dt/2 m_i F_i
/// on free rows. Noslip rows carry V = 0, dirichlet rows the prescribed
/// velocity at the midpoint, slip rows n_i . V_i = 0 with the tangential
/// equation retained.
template <int dim>
VelocityUpdate<dim> velocity_update(const SolutionField<dim>& field, const DiscreteOperators<dim>& ops,
                                    const VelocityField<dim>& force, const BoundaryData<dim>& data, double t_mid,
                                    double dt, const CgOptions& cg = {}) {
  const auto& g = ops.graph;
  const int n = g.n_rows();
  std::vector<Tensor<dim>> P(n);
  VelocityField<dim> lift(n, Vec<dim>::Zero()), b(n), v_old(n);
  std::vector<double> rho_m(n);
  for (int i = 0; i < n; ++i) {
    P[i] = detail::velocity_projector(ops, i);
    rho_m[i] = field.U[i][0] * ops.lumped_mass[i];
    v_old[i] = velocity<dim>(field.U[i]);
    b[i] = ops.lumped_mass[i] * (momentum<dim>(field.U[i]) + 0.5 * dt * force[i]);
    if (ops.bc[i] == BoundaryKind::dirichlet)
      lift[i] = velocity<dim>(data.dirichlet_state(i, ops.coordinates[i], t_mid));
  }

  auto apply_A = [&](const VelocityField<dim>& v) {
    VelocityField<dim> y(n);
    for (int i = 0; i < n; ++i) {
      Vec<dim> s = rho_m[i] * v[i];
      for (int k = g.row_begin(i); k < g.row_end(i); ++k) s += 0.5 * dt * ops.B[k] * v[g.col(k)];
      y[i] = s;
    }
    return y;
  };

  // Constrained SPD system (P A P + I - P) w = P (b - A lift), V = lift + P w.
  const VelocityField<dim> A_lift = apply_A(lift);
  VelocityField<dim> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = P[i] * (b[i] - A_lift[i]);

  std::vector<Tensor<dim>> block_inv(n);
  for (int i = 0; i < n; ++i) {
    const Tensor<dim> Aii = rho_m[i] * Tensor<dim>::Identity() + 0.5 * dt * ops.B[g.diag(i)];
    block_inv[i] = (P[i] * Aii * P[i] + Tensor<dim>::Identity() - P[i]).inverse();
  }

  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    VelocityField<dim> w = detail::unflatten<dim>(x);
    VelocityField<dim> pw(n);
    for (int i = 0; i < n; ++i) pw[i] = P[i] * w[i];
    VelocityField<dim> y = apply_A(pw);
    for (int i = 0; i < n; ++i) y[i] = P[i] * y[i] + w[i] - pw[i];
    return detail::flatten<dim>(y);
  };
  auto precond = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    Eigen::VectorXd z(r.size());
    for (int i = 0; i < n; ++i) z.template segment<dim>(dim * i) = block_inv[i] * r.template segment<dim>(dim * i);
    return z;
  };

  // Start from the old velocity restricted to the free directions.
  VelocityField<dim> guess(n);
  for (int i = 0; i < n; ++i) guess[i] = P[i] * v_old[i];
  const auto sol = cg_solve(apply, precond, detail::flatten<dim>(rhs), detail::flatten<dim>(guess), cg);

  VelocityUpdate<dim> out;
  out.iterations = sol.iterations;
  out.relative_residual = sol.relative_residual;
  const VelocityField<dim> w = detail::unflatten<dim>(sol.x);
  out.v_half.resize(n);
  for (int i = 0; i < n; ++i) out.v_half[i] = lift[i] + P[i] * w[i];
  const VelocityField<dim> Av = apply_A(out.v_half);
  out.v_new.resize(n);
  for (int i = 0; i < n; ++i) {
    out.v_new[i] = 2.0 * out.v_half[i] - v_old[i];
    if (ops.bc[i] != BoundaryKind::interior) {
      const Vec<dim> R = (Tensor<dim>::Identity() - P[i]) * (b[i] - Av[i]);
      out.boundary_work -= 2.0 * out.v_half[i].dot(R);
    }
  }
  return out;
}

/// a(v, v) = sum_{i,j} v_i^T B_ij v_j.
template <int dim>
double viscous_energy(const VelocityField<dim>& v, const DiscreteOperators<dim>& ops) {
  const auto& g = ops.graph;
  double s = 0.0;
  for (int i = 0; i < g.n_rows(); ++i)
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) s += v[i].dot(ops.B[k] * v[g.col(k)]);
  return s;
}

/// K_i = (1/m_i) int s(v):e(v) phi_i, exact for P1 velocities since the
/// integrand is cellwise constant times phi_i.
template <int dim>
std::vector<double> viscous_dissipation(const VelocityField<dim>& v, const DiscreteOperators<dim>& ops,
                                        const GasModel& gas) {
  const int n = ops.n_dofs();
  std::vector<double> K(n, 0.0);
  const double mu = gas.mu();
  const double lam = gas.lambda() - 2.0 / 3.0 * mu;
  for (const auto& cell : ops.cells) {
    Tensor<dim> grad = Tensor<dim>::Zero();
    for (int a = 0; a <= dim; ++a) grad += v[cell.dofs[a]] * cell.grad[a].transpose();
    const Tensor<dim> eps = 0.5 * (grad + grad.transpose());
    const double tr = eps.trace();
    const double density = 2.0 * mu * eps.squaredNorm() + lam * tr * tr;
    const double share = density * cell.measure / (dim + 1);
    for (int a = 0; a <= dim; ++a) K[cell.dofs[a]] += share;
  }
  for (int i = 0; i < n; ++i) K[i] = std::max(0.0, K[i] / ops.lumped_mass[i]);
  return K;
}

namespace detail {

/// Solves (M rho + theta dt beta) delta = theta dt (m K - beta e) and returns e + delta.
template <int dim>
std::vector<double> energy_solve(const std::vector<double>& e, const std::vector<double>& K,
                                 const SolutionField<dim>& field, const DiscreteOperators<dim>& ops, double dt,
                                 double theta, const CgOptions& cg) {
  const auto& g = ops.graph;
  const int n = g.n_rows();
  std::vector<double> vals(g.n_entries());
  for (int k = 0; k < g.n_entries(); ++k) vals[k] = theta * dt * ops.beta[k];
  for (int i = 0; i < n; ++i) vals[g.diag(i)] += ops.lumped_mass[i] * field.U[i][0];
  const CsrMatrix A(g, std::move(vals));
  const CsrMatrix beta(g, ops.beta);
  const Eigen::Map<const Eigen::VectorXd> e_vec(e.data(), n);
  const Eigen::VectorXd be = beta * Eigen::VectorXd(e_vec);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = theta * dt * (ops.lumped_mass[i] * K[i] - be[i]);
  const auto sol = cg_solve(A, rhs, Eigen::VectorXd::Zero(n), cg);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = e[i] + sol.x[i];
  return out;
}

}  // namespace detail

/// Backward-Euler internal energy: m_i rho_i (e^L - e^n) + dt sum_j beta_ij e^L_j = dt m_i K_i.
template <int dim>
std::vector<double> energy_low_order(const std::vector<double>& e_n, const std::vector<double>& K,
                                     const SolutionField<dim>& field, const DiscreteOperators<dim>& ops, double dt,
                                     const CgOptions& cg = {}) {
  return detail::energy_solve(e_n, K, field, ops, dt, 1.0, cg);
}

/// Crank-Nicolson internal energy e^H = 2 e^{1/2} - e^n with
/// m_i rho_i (e^{1/2} - e^n) + dt/2 sum_j beta_ij e^{1/2}_j = dt/2 m_i K_i.
template <int dim>
std::vector<double> energy_high_order(const std::vector<double>& e_n, const std::vector<double>& K,
                                      const SolutionField<dim>& field, const DiscreteOperators<dim>& ops, double dt,
                                      const CgOptions& cg = {}) {
  auto half = detail::energy_solve(e_n, K, field, ops, dt, 0.5, cg);
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = 2.0 * half[i] - e_n[i];
  return half;
}

struct FctResult {
  std::vector<double> e;
  std::vector<double> A;        // antidiffusive flux per stencil entry
  std::vector<double> P_minus;  // sum_j min(A_ij, 0)
  std::vector<double> Q_minus;  // m_i rho_i (e_min - e^L_i)
  std::vector<double> l_minus;
  std::vector<double> l;        // per stencil entry
  /// min_i (l^-_i P^-_i - Q^-_i) / (m_i rho_i max(|e_min|, |e^L_i|)); must be >= 0.
  double min_slack = std::numeric_limits<double>::infinity();
};

/// Flux-corrected blend of e^L and e^H preserving e >= e_min.
template <int dim>
FctResult fct_limit_energy(const std::vector<double>& e_n, const std::vector<double>& e_L,
                           const std::vector<double>& e_H, double e_min, const SolutionField<dim>& field,
                           const DiscreteOperators<dim>& ops, double dt) {
  const auto& g = ops.graph;
  const int n = g.n_rows();
  FctResult r;
  r.A.assign(g.n_entries(), 0.0);
  r.l.assign(g.n_entries(), 1.0);
  r.P_minus.assign(n, 0.0);
  r.Q_minus.assign(n, 0.0);
  r.l_minus.assign(n, 1.0);
  std::vector<double> mr(n);
  for (int i = 0; i < n; ++i) {
    mr[i] = ops.lumped_mass[i] * field.U[i][0];
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) {
      const int j = g.col(k);
      if (j == i) continue;
      r.A[k] = -0.5 * dt * ops.beta[k] * ((e_H[j] - e_H[i]) + (e_n[j] - e_n[i]) - 2.0 * (e_L[j] - e_L[i]));
      r.P_minus[i] += std::min(r.A[k], 0.0);
    }
    r.Q_minus[i] = mr[i] * (e_min - e_L[i]);
    if (r.P_minus[i] < 0.0) {
      double l = std::clamp(r.Q_minus[i] / r.P_minus[i], 0.0, 1.0);
      // The rounded quotient may overshoot by an ulp; keep l P >= Q as evaluated.
      while (l > 0.0 && l * r.P_minus[i] < r.Q_minus[i]) l = std::nextafter(l, 0.0);
      r.l_minus[i] = l;
    }
  }
  r.e = e_L;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = g.row_begin(i); k < g.row_end(i); ++k) {
      const int j = g.col(k);
      if (j == i) continue;
      double l;
      if (r.A[k] > 0.0) l = r.l_minus[j];
      else if (r.A[k] < 0.0) l = r.l_minus[i];
      else l = std::min(r.l_minus[i], r.l_minus[j]);
      r.l[k] = l;
      acc += l * r.A[k];
    }
    r.e[i] += acc / mr[i];
    const double scale = mr[i] * std::max(std::abs(e_min), std::abs(e_L[i]));
    r.min_slack = std::min(r.min_slack, (r.l_minus[i] * r.P_minus[i] - r.Q_minus[i]) / scale);
  }
  return r;
}

/// E_i = rho_i e_i + rho_i |V_i|^2 / 2 with rho frozen.
template <int dim>
SolutionField<dim> total_energy_update(const SolutionField<dim>& field, const VelocityField<dim>& v,
                                       const std::vector<double>& e) {
  SolutionField<dim> out = field;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double rho = field.U[i][0];
    out.U[i].template segment<dim>(1) = rho * v[i];
    out.U[i][dim + 1] = rho * e[i] + 0.5 * rho * v[i].squaredNorm();
  }
  return out;
}

enum class EnergyFloor {
  /// e_min = min_j e^n_j.
  previous_minimum,
  /// e_min = min_j (e^n_j + dt K_j / rho_j).
  dissipation_shifted,
};

struct ParabolicConfig {
  CgOptions cg;
  EnergyFloor floor = EnergyFloor::previous_minimum;
};

struct ParabolicReport {
  bool skipped = false;  // mu = 0 and no force: exact identity
  bool density_frozen = true;
  double min_e_before = 0.0;
  double min_e_after = 0.0;
  double e_floor = 0.0;
  double fct_min_slack = std::numeric_limits<double>::infinity();
  double internal_energy_budget_residual = 0.0;  // |sum m rho (e_new - e_L)| / sum m rho |e_L|
  double energy_before = 0.0;
  double energy_after = 0.0;
  double force_work = 0.0;     // dt sum_i m_i F_i . V_half_i
  double boundary_work = 0.0;
  double balance_residual = 0.0;  // relative
  int cg_iterations = 0;
};

template <int dim>
struct ParabolicResult {
  SolutionField<dim> field;
  ParabolicReport report;
  VelocityUpdate<dim> velocity;
};

template <int dim>
double lumped_total(const SolutionField<dim>& f, const DiscreteOperators<dim>& ops, int component) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += ops.lumped_mass[i] * f.U[i][component];
  return s;
}

/// S_2h over a step of length dt. Forces and boundary data are sampled at
/// t_mid; the returned field keeps the input time. Dirichlet dofs are reset
/// to their prescribed state after the audits are recorded.
template <int dim>
ParabolicResult<dim> parabolic_step(const SolutionField<dim>& field, const DiscreteOperators<dim>& ops,
                                    const GasModel& gas, const BoundaryData<dim>& data, double t_mid, double dt,
                                    const ParabolicConfig& config = {}) {
  const int n = ops.n_dofs();
  ParabolicResult<dim> res;
  auto& rep = res.report;
  std::vector<double> e_n(n);
  for (int i = 0; i < n; ++i) {
    if (!is_admissible<dim>(field.U[i]))
      throw DomainError("parabolic_step: inadmissible state at node " + std::to_string(i));
    e_n[i] = internal_energy<dim>(field.U[i]);
  }
  rep.min_e_before = *std::min_element(e_n.begin(), e_n.end());
  rep.energy_before = lumped_total(field, ops, dim + 1);

  if (gas.mu() == 0.0 && !data.force) {
    res.field = field;
    rep.skipped = true;
    rep.min_e_after = rep.min_e_before;
    rep.e_floor = rep.min_e_before;
    rep.energy_after = rep.energy_before;
    return res;
  }

  VelocityField<dim> force(n);
  for (int i = 0; i < n; ++i) force[i] = data.force_at(ops.coordinates[i], t_mid);

  res.velocity = velocity_update(field, ops, force, data, t_mid, dt, config.cg);
  const auto& vel = res.velocity;
  const auto K = viscous_dissipation(vel.v_half, ops, gas);

  double e_floor = rep.min_e_before;
  if (config.floor == EnergyFloor::dissipation_shifted) {
    e_floor = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) e_floor = std::min(e_floor, e_n[i] + dt * K[i] / field.U[i][0]);
  }
  rep.e_floor = e_floor;

  auto e_L = energy_low_order(e_n, K, field, ops, dt, config.cg);
  // The discrete minimum principle holds up to the solver tolerance; clip
  // that residue so that Q^- <= 0.
  for (auto& e : e_L) e = std::max(e, e_floor);
  const auto e_H = energy_high_order(e_n, K, field, ops, dt, config.cg);
  const auto fct = fct_limit_energy(e_n, e_L, e_H, e_floor, field, ops, dt);
  rep.fct_min_slack = fct.min_slack;

  double budget = 0.0, budget_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mr = ops.lumped_mass[i] * field.U[i][0];
    budget += mr * (fct.e[i] - e_L[i]);
    budget_scale += mr * std::abs(e_L[i]);
  }
  rep.internal_energy_budget_residual = std::abs(budget) / budget_scale;

  res.field = total_energy_update(field, vel.v_new, fct.e);
  rep.cg_iterations = vel.iterations;
  for (int i = 0; i < n; ++i)
    if (std::memcmp(&res.field.U[i][0], &field.U[i][0], sizeof(double)) != 0) rep.density_frozen = false;
  rep.min_e_after = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) rep.min_e_after = std::min(rep.min_e_after, internal_energy<dim>(res.field.U[i]));

  rep.energy_after = lumped_total(res.field, ops, dim + 1);
  for (int i = 0; i < n; ++i) rep.force_work += dt * ops.lumped_mass[i] * force[i].dot(vel.v_half[i]);
  rep.boundary_work = vel.boundary_work;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale += ops.lumped_mass[i] * std::abs(field.U[i][dim + 1]);
  rep.balance_residual =
      std::abs(rep.energy_after - rep.energy_before - rep.force_work - rep.boundary_work) / scale;

  for (int i = 0; i < n; ++i)
    if (ops.bc[i] == BoundaryKind::dirichlet) res.field.U[i] = data.dirichlet_state(i, ops.coordinates[i], t_mid);
  return res;
}

}  // namespace idp

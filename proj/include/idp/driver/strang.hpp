#pragma once

#include "idp/core/boundary.hpp"
#include "idp/core/errors.hpp"
#include "idp/hyperbolic/hyperbolic_step.hpp"
#include "idp/parabolic/parabolic_step.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace idp {

struct TimeControls {
  double cfl = 0.4;
  double t_final = 0.0;
  long max_steps = 10'000'000;
  /// Check nodewise admissibility every this many steps (0 disables).
  int audit_every = 1;
};

/// Totals of lumped-mass weighted conserved variables.
template <int dim>
struct ConservationLedger {
  double mass = 0.0;
  Vec<dim> momentum = Vec<dim>::Zero();
  double energy = 0.0;
};

template <int dim>
ConservationLedger<dim> conservation_ledger(const SolutionField<dim>& f, const DiscreteOperators<dim>& ops) {
  ConservationLedger<dim> l;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = ops.lumped_mass[i];
    l.mass += m * f.U[i][0];
    l.momentum += m * momentum<dim>(f.U[i]);
    l.energy += m * f.U[i][dim + 1];
  }
  return l;
}

struct FieldMinima {
  double rho = std::numeric_limits<double>::infinity();
  double e = std::numeric_limits<double>::infinity();
  double s = std::numeric_limits<double>::infinity();
  bool admissible = true;
  int first_bad_node = -1;
};

template <int dim>
FieldMinima field_minima(const SolutionField<dim>& f, const GasModel& gas) {
  FieldMinima m;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& U = f.U[i];
    m.rho = std::min(m.rho, U[0]);
    if (!is_admissible<dim>(U)) {
      if (m.admissible) m.first_bad_node = static_cast<int>(i);
      m.admissible = false;
      continue;
    }
    const double e = internal_energy<dim>(U);
    m.e = std::min(m.e, e);
    m.s = std::min(m.s, specific_entropy(U[0], e, gas));
  }
  return m;
}

enum class Substep { hyperbolic, parabolic };

template <int dim>
struct StrangHooks {
  /// Called after every substep with its input and output.
  std::function<void(Substep, const SolutionField<dim>&, const SolutionField<dim>&)> on_substep;
};

struct StepConfig {
  HyperbolicConfig hyperbolic;
  ParabolicConfig parabolic;
};

template <int dim>
struct StepReport {
  long step = 0;
  double t = 0.0;   // time at the end of the step
  double dt = 0.0;
  double dt0 = 0.0;  // from u^n
  bool retried = false;
  FieldMinima minima;
  ConservationLedger<dim> ledger;
  /// min s before/after each hyperbolic half, min e before/after S_2h.
  double s_before_h1 = 0.0, s_after_h1 = 0.0, s_before_h2 = 0.0, s_after_h2 = 0.0;
  double e_before_p = 0.0, e_after_p = 0.0;
  HyperbolicStats hyperbolic;
  ParabolicReport parabolic;
};

template <int dim>
struct StepResult {
  SolutionField<dim> field;
  StepReport<dim> report;
};

/// Step size dt0 of the hyperbolic substep at `field`.
template <int dim>
double hyperbolic_time_scale(const SolutionField<dim>& field, const DiscreteOperators<dim>& ops, const GasModel& gas) {
  return dt_max(compute_dij_low(field, ops, gas), ops);
}

namespace detail {

template <int dim>
StepResult<dim> strang_compose(const SolutionField<dim>& field, const DiscreteOperators<dim>& ops,
                               const GasModel& gas, const BoundaryData<dim>& data, double dt,
                               const StepConfig& config, const StrangHooks<dim>& hooks) {
  StepResult<dim> out;
  auto& rep = out.report;
  rep.dt = dt;
  const double t = field.time;

  auto h1 = ssprk2_hyperbolic(field, ops, gas, data, 0.5 * dt, config.hyperbolic);
  if (hooks.on_substep) hooks.on_substep(Substep::hyperbolic, field, h1.field);
  rep.s_before_h1 = field_minima(field, gas).s;
  rep.s_after_h1 = field_minima(h1.field, gas).s;

  auto p = parabolic_step(h1.field, ops, gas, data, t + 0.5 * dt, dt, config.parabolic);
  p.field.time = t + 0.5 * dt;
  if (hooks.on_substep) hooks.on_substep(Substep::parabolic, h1.field, p.field);
  rep.e_before_p = p.report.min_e_before;
  rep.e_after_p = p.report.min_e_after;

  auto h2 = ssprk2_hyperbolic(p.field, ops, gas, data, 0.5 * dt, config.hyperbolic);
  if (hooks.on_substep) hooks.on_substep(Substep::hyperbolic, p.field, h2.field);
  rep.s_before_h2 = field_minima(p.field, gas).s;
  rep.s_after_h2 = field_minima(h2.field, gas).s;

  rep.hyperbolic = h1.stats;
  rep.hyperbolic.merge(h2.stats);
  rep.parabolic = p.report;
  out.field = std::move(h2.field);
  out.field.time = t + dt;
  return out;
}

}  // namespace detail

/// One step S_1h(dt/2) o S_2h(dt) o S_1h(dt/2) with dt = min(cfl dt0(u^n), max_dt).
/// A CFL violation inside the composition triggers one retry with dt halved.
template <int dim>
StepResult<dim> strang_step(const SolutionField<dim>& field, const DiscreteOperators<dim>& ops, const GasModel& gas,
                            const BoundaryData<dim>& data, const TimeControls& controls,
                            const StepConfig& config = {}, const StrangHooks<dim>& hooks = {},
                            double max_dt = std::numeric_limits<double>::infinity()) {
  if (!(controls.cfl > 0.0)) throw ConfigError("strang_step: cfl must be > 0");
  const double dt0 = hyperbolic_time_scale(field, ops, gas);
  double dt = std::min(controls.cfl * dt0, max_dt);
  StepResult<dim> res;
  bool retried = false;
  try {
    res = detail::strang_compose(field, ops, gas, data, dt, config, hooks);
  } catch (const CflViolation&) {
    retried = true;
    dt *= 0.5;
    res = detail::strang_compose(field, ops, gas, data, dt, config, hooks);
  }
  res.report.dt0 = dt0;
  res.report.retried = retried;
  res.report.t = res.field.time;
  res.report.minima = field_minima(res.field, gas);
  res.report.ledger = conservation_ledger(res.field, ops);
  return res;
}

/// A step failed; carries the step index and the time at which it started.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(long step, double time, const std::string& cause)
      : std::runtime_error(message(step, time, cause)), step(step), time(time), cause(cause) {}
  long step;
  double time;
  std::string cause;

 private:
  static std::string message(long step, double time, const std::string& cause) {
    std::ostringstream os;
    os << "step " << step << " at t = " << time << ": " << cause;
    return os.str();
  }
};

template <int dim>
struct RunCallbacks {
  std::function<void(const SolutionField<dim>&)> on_snapshot;
  std::function<void(const StepReport<dim>&)> on_step;
  StrangHooks<dim> hooks;
};

template <int dim>
struct RunResult {
  SolutionField<dim> field;
  std::vector<StepReport<dim>> reports;
};

/// Advances `initial` to controls.t_final. Steps are clipped so that the last
/// step and every requested snapshot time are hit exactly. When the boundary
/// data carries no dirichlet function, dirichlet dofs keep their initial values.
template <int dim>
RunResult<dim> run_simulation(const SolutionField<dim>& initial, const DiscreteOperators<dim>& ops,
                              const GasModel& gas, BoundaryData<dim> data, const TimeControls& controls,
                              const StepConfig& config = {}, std::vector<double> snapshot_times = {},
                              const RunCallbacks<dim>& callbacks = {}) {
  if (initial.size() != static_cast<std::size_t>(ops.n_dofs()))
    throw ConfigError("run_simulation: field size does not match the number of dofs");
  if (controls.t_final < initial.time) throw ConfigError("run_simulation: t_final precedes the start time");
  if (!data.dirichlet) data.frozen = initial.U;

  RunResult<dim> out;
  out.field = initial;
  apply_hyperbolic_bc(out.field, ops, data, out.field.time);
  for (std::size_t i = 0; i < out.field.size(); ++i)
    if (!is_admissible<dim>(out.field.U[i]))
      throw DomainError("run_simulation: initial state inadmissible at node " + std::to_string(i));

  std::sort(snapshot_times.begin(), snapshot_times.end());
  std::size_t next_snap = 0;
  auto emit_due = [&]() {
    while (next_snap < snapshot_times.size() &&
           snapshot_times[next_snap] <= out.field.time + 1e-12 * std::max(1.0, std::abs(out.field.time))) {
      if (callbacks.on_snapshot) callbacks.on_snapshot(out.field);
      ++next_snap;
    }
  };
  emit_due();

  const double t_end = controls.t_final;
  long step = 0;
  while (out.field.time < t_end) {
    if (step >= controls.max_steps) throw StepFailure(step, out.field.time, "max_steps reached before t_final");
    double target = t_end;
    if (next_snap < snapshot_times.size()) target = std::min(target, snapshot_times[next_snap]);
    const double max_dt = target - out.field.time;
    StepResult<dim> r;
    try {
      r = strang_step(out.field, ops, gas, data, controls, config, callbacks.hooks, max_dt);
    } catch (const std::exception& e) {
      throw StepFailure(step, out.field.time, e.what());
    }
    ++step;
    // Land exactly on the target when the step was clipped there.
    if (r.report.dt == max_dt) r.field.time = target;
    r.report.step = step;
    r.report.t = r.field.time;
    if (controls.audit_every > 0 && step % controls.audit_every == 0 && !r.report.minima.admissible) {
      std::ostringstream os;
      os << "inadmissible state at node " << r.report.minima.first_bad_node;
      throw StepFailure(step, r.field.time, os.str());
    }
    out.field = std::move(r.field);
    if (callbacks.on_step) callbacks.on_step(r.report);
    out.reports.push_back(std::move(r.report));
    emit_due();
  }
  return out;
}

}  // namespace idp

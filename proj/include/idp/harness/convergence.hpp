#pragma once

#include "idp/driver/strang.hpp"
#include "idp/harness/cases.hpp"
#include "idp/harness/error_norms.hpp"
#include "idp/harness/output.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace idp {

struct ConvergenceRow {
  int N = 0;
  double h = 0.0;  // (|Omega| / N)^{1/d}
  ErrorReport errors;
  std::optional<double> rate1, rate2, rateinf;
  long steps = 0;
};

/// rate = log(delta_coarse / delta_fine) / log(h_coarse / h_fine); undefined
/// when either delta vanishes.
inline std::optional<double> observed_rate(double d_coarse, double d_fine, double h_coarse, double h_fine) {
  if (!(d_coarse > 0.0) || !(d_fine > 0.0) || h_coarse == h_fine) return std::nullopt;
  return std::log(d_coarse / d_fine) / std::log(h_coarse / h_fine);
}

inline void fill_rates(std::vector<ConvergenceRow>& rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& c = rows[k - 1];
    auto& f = rows[k];
    f.rate1 = observed_rate(c.errors.delta1, f.errors.delta1, c.h, f.h);
    f.rate2 = observed_rate(c.errors.delta2, f.errors.delta2, c.h, f.h);
    f.rateinf = observed_rate(c.errors.deltainf, f.errors.deltainf, c.h, f.h);
  }
}

/// CSV with columns N, delta1, rate1, delta2, rate2, deltainf, rateinf; missing
/// rates are written as "--".
inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "N,delta1,rate1,delta2,rate2,deltainf,rateinf\n";
  auto rate = [](const std::optional<double>& r) {
    if (!r) return std::string("--");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8f", *r);
    return std::string(buf);
  };
  auto num = [](double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10e", d);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.N) + "," + num(r.errors.delta1) + "," + rate(r.rate1) + "," + num(r.errors.delta2) +
           "," + rate(r.rate2) + "," + num(r.errors.deltainf) + "," + rate(r.rateinf) + "\n";
  }
  return out;
}

template <int dim>
struct CaseRun {
  SolutionField<dim> field;
  std::vector<StepReport<dim>> reports;
  std::optional<ErrorReport> errors;
};

/// Runs a case to its final time and measures the error when an exact
/// solution is known.
template <int dim>
CaseRun<dim> run_case(const CaseSetup<dim>& s, const RunCallbacks<dim>& callbacks = {},
                      NormQuadrature quadrature = NormQuadrature::lumped) {
  auto r = run_simulation(s.initial, s.ops, s.gas, s.boundary, s.controls, s.step, s.snapshots, callbacks);
  CaseRun<dim> out;
  out.field = std::move(r.field);
  out.reports = std::move(r.reports);
  if (s.exact) {
    const double t = out.field.time;
    out.errors = compute_errors<dim>(out.field, s.ops, [&](const Vec<dim>& x) { return s.exact(x, t); }, quadrature);
  }
  return out;
}

/// One study entry: either a node count (1D) or a mesh file (2D).
struct GridSpec {
  std::optional<int> n;
  std::optional<std::string> mesh_file;
  std::optional<int> ny;
};

/// Runs the case on every grid in order. After each grid the CSV at
/// `csv_path` (if non-empty) is rewritten, so a failure leaves the completed
/// rows on disk before the error propagates.
template <int dim>
std::vector<ConvergenceRow> convergence_study(
    const RunConfig& base, const std::vector<GridSpec>& grids, const std::string& csv_path = "",
    const std::function<CaseSetup<dim>(const RunConfig&)>& make = {},
    const std::function<void(const ConvergenceRow&)>& progress = {}) {
  if (grids.size() < 2) throw ConfigError("convergence_study: at least two grids are required");
  std::vector<ConvergenceRow> rows;
  for (const auto& g : grids) {
    RunConfig c = base;
    if (g.n) c.n = g.n;
    if (g.mesh_file) c.mesh_file = g.mesh_file;
    if (g.ny) c.ny = g.ny;
    c.snapshots = std::vector<double>{};
    const CaseSetup<dim> s = make(c);
    if (!s.exact) throw ConfigError("convergence_study: case '" + s.name + "' has no exact solution");
    const auto run = run_case(s);
    ConvergenceRow row;
    row.N = s.size_parameter;
    row.h = std::pow(s.ops.measure / row.N, 1.0 / dim);
    row.errors = *run.errors;
    row.steps = static_cast<long>(run.reports.size());
    rows.push_back(row);
    fill_rates(rows);
    if (!csv_path.empty()) write_file_atomic(csv_path, convergence_csv(rows));
    if (progress) progress(rows.back());
  }
  return rows;
}

}  // namespace idp

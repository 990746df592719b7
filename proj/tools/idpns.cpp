// Command-line front end: run, converge, mesh-info, export-exact.

#include "idp/idp.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace idp;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

template <int dim>
std::string step_log_csv(const std::vector<StepReport<dim>>& reports) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "step,t,dt,dt0,retried,min_rho,min_e,min_s,mass,energy,limited_edges,min_l,parabolic_balance,fct_slack\n";
  for (const auto& r : reports) {
    os << r.step << ',' << r.t << ',' << r.dt << ',' << r.dt0 << ',' << r.retried << ',' << r.minima.rho << ','
       << r.minima.e << ',' << r.minima.s << ',' << r.ledger.mass << ',' << r.ledger.energy << ','
       << r.hyperbolic.limiter.limited_edges << ',' << r.hyperbolic.limiter.min_l << ','
       << r.parabolic.balance_residual << ',' << r.parabolic.fct_min_slack << '\n';
  }
  return os.str();
}

template <int dim>
int run_setup(const CaseSetup<dim>& s, const std::string& out_dir, const std::string& prefix) {
  const std::string stem = prefix.empty() ? s.name : prefix;
  int snap_index = 0;
  RunCallbacks<dim> cb;
  cb.on_snapshot = [&](const SolutionField<dim>& f) {
    char name[256];
    std::snprintf(name, sizeof name, "%s_%03d_t%.4f.vtk", stem.c_str(), snap_index++, f.time);
    write_vtk(join_path(out_dir, name), s.mesh, s.ops, f, s.gas);
    std::cout << "snapshot t = " << f.time << " -> " << name << '\n';
  };
  const auto run = run_case(s, cb);
  write_file_atomic(join_path(out_dir, stem + "_final.csv"), field_csv(s.ops, run.field, s.gas));
  write_file_atomic(join_path(out_dir, stem + "_steps.csv"), step_log_csv(run.reports));
  std::cout << s.name << ": " << s.mesh.n_nodes() << " nodes, " << run.reports.size() << " steps, t = "
            << run.field.time << '\n';
  if (run.errors)
    std::cout << std::scientific << std::setprecision(4) << "delta1 = " << run.errors->delta1
              << "  delta2 = " << run.errors->delta2 << "  deltainf = " << run.errors->deltainf << '\n';
  return 0;
}

int cmd_run(const RunConfig& c) {
  const std::string out_dir = resolve_output_directory(c);
  if (case_dimension(c.case_name) == 1) {
    return run_setup(c.case_name == "sod1d" ? make_sod1d(c) : make_becker1d(c), out_dir, c.prefix);
  }
  return run_setup(c.case_name == "shocktube2d" ? make_shocktube2d(c) : make_becker2d(c), out_dir, c.prefix);
}

void print_rows(const std::vector<ConvergenceRow>& rows) {
  std::cout << convergence_csv(rows);
}

int cmd_converge(const RunConfig& c, const std::vector<std::string>& grids, const std::vector<std::string>& meshes,
                 const std::string& csv_name) {
  const std::string out_dir = resolve_output_directory(c);
  const std::string csv = join_path(out_dir, csv_name.empty() ? c.case_name + "_convergence.csv" : csv_name);
  std::vector<GridSpec> specs;
  for (const auto& g : grids) {
    GridSpec s;
    try {
      if (case_dimension(c.case_name) == 1) s.n = std::stoi(g);
      else s.ny = std::stoi(g);
    } catch (const std::logic_error&) {
      throw ConfigError("--grids: '" + g + "' is not an integer");
    }
    specs.push_back(s);
  }
  for (const auto& m : meshes) specs.push_back(GridSpec{std::nullopt, m, std::nullopt});
  auto progress = [](const ConvergenceRow& r) {
    std::cerr << "N = " << r.N << " done (" << r.steps << " steps, delta1 = " << r.errors.delta1 << ")\n";
  };
  std::vector<ConvergenceRow> rows;
  if (c.case_name == "becker1d") {
    rows = convergence_study<1>(c, specs, csv, make_becker1d, progress);
  } else if (c.case_name == "becker2d") {
    rows = convergence_study<2>(c, specs, csv, make_becker2d, progress);
  } else {
    throw ConfigError("converge: case '" + c.case_name + "' has no exact solution");
  }
  print_rows(rows);
  std::cout << "written " << csv << '\n';
  return 0;
}

template <int dim>
int mesh_info(const std::string& path, bool strict) {
  const auto mesh = import_mesh<dim>(path);
  AssemblyOptions opt;
  opt.warn = false;
  const auto ops = assemble_operators(mesh, GasModel(1.4, 1.0, 0.0, 0.75), opt);
  int counts[4] = {0, 0, 0, 0};
  for (auto k : ops.bc) ++counts[static_cast<int>(k)];
  // beta = (kappa / c_v) * stiffness; report the stiffness-scaled value.
  const double scale = GasModel(1.4, 1.0, 0.0, 0.75).kappa_over_cv();
  double max_beta = -std::numeric_limits<double>::infinity(), max_diag = 0.0;
  for (int i = 0; i < ops.n_dofs(); ++i) {
    max_diag = std::max(max_diag, ops.beta[ops.graph.diag(i)] / scale);
    for (int k = ops.graph.row_begin(i); k < ops.graph.row_end(i); ++k)
      if (ops.graph.col(k) != i) max_beta = std::max(max_beta, ops.beta[k] / scale);
  }
  const bool ok = ops.n_positive_offdiag == 0;
  std::cout << "mesh: " << path << '\n'
            << "dimension: " << dim << '\n'
            << "nodes: " << mesh.n_nodes() << '\n'
            << "cells: " << mesh.n_cells() << '\n'
            << "dofs: " << mesh.n_dofs() << '\n'
            << "measure: " << std::setprecision(12) << ops.measure << '\n'
            << "boundary dofs: dirichlet " << counts[1] << ", slip " << counts[2] << ", noslip " << counts[3] << '\n'
            << "max off-diagonal beta (per unit kappa/c_v): " << std::scientific << max_beta << '\n'
            << "max diagonal beta (per unit kappa/c_v): " << max_diag << '\n'
            << "acute-angle condition (beta_ij <= 0): " << (ok ? "yes" : "no") << " ("
            << ops.n_positive_offdiag << " positive entries above roundoff)\n";
  return ok || !strict ? 0 : 3;
}

int cmd_export_exact(const RunConfig& c, int samples, double t, double x0, double x1, const std::string& out) {
  const BeckerParams p = becker_params(c);
  if (samples < 2) throw ConfigError("--samples must be >= 2");
  std::ostringstream os;
  os << std::setprecision(17) << "x,rho,v,e,m,E,p\n";
  for (int k = 0; k < samples; ++k) {
    const double x = x0 + (x1 - x0) * k / (samples - 1);
    const auto U = becker_state<1>(x, t, p);
    os << x << ',' << U[0] << ',' << U[1] / U[0] << ',' << internal_energy<1>(U) << ',' << U[1] << ',' << U[2]
       << ',' << pressure<1>(U, p.gas()) << '\n';
  }
  if (out.empty() || out == "-") {
    std::cout << os.str();
  } else {
    const std::string path = std::filesystem::path(out).is_absolute() || out.find('/') != std::string::npos
                                 ? out
                                 : join_path(resolve_output_directory(c), out);
    write_file_atomic(path, os.str());
    std::cout << "written " << path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-domain-preserving compressible Navier-Stokes solver"};
  app.require_subcommand(1);

  std::string config_path, case_name, output_dir, grids, meshes, csv_name, mesh_path, out_file;
  std::optional<double> cfl, t_final;
  bool relax = false, no_limit = false, strict = false;
  int samples = 501;
  double t_exact = 0.0, x0 = -1.0, x1 = 1.5;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--output", output_dir, "output directory (IDP_OUTPUT_DIR takes precedence)");
    sub->add_option("--cfl", cfl, "CFL number");
    sub->add_option("--t-final", t_final, "final time");
    sub->add_flag("--relax", relax, "relax the local bounds of the convex limiter");
    sub->add_flag("--no-limit", no_limit, "disable convex limiting (high-order update is not bounded)");
  };

  auto* run = app.add_subcommand("run", "run a configured case");
  add_common(run);
  run->add_option("--case", case_name, "case name overriding the config");

  auto* conv = app.add_subcommand("converge", "convergence study against the exact solution");
  add_common(conv);
  conv->add_option("--case", case_name, "becker1d or becker2d")->required();
  conv->add_option("--grids", grids, "comma list of node counts (1D) or ny values (2D structured)");
  conv->add_option("--meshes", meshes, "comma list of mesh files (2D)");
  conv->add_option("--csv", csv_name, "CSV file name inside the output directory");

  auto* info = app.add_subcommand("mesh-info", "mesh diagnostics including the sign of beta_ij");
  info->add_option("mesh", mesh_path, "mesh file")->required()->check(CLI::ExistingFile);
  info->add_flag("--strict", strict, "exit with status 3 when a positive off-diagonal beta_ij is found");

  auto* exact = app.add_subcommand("export-exact", "sample the exact Becker solution");
  add_common(exact);
  exact->add_option("--samples", samples, "number of sample points");
  exact->add_option("--time", t_exact, "time at which to sample");
  exact->add_option("--x0", x0, "left end of the sampling interval");
  exact->add_option("--x1", x1, "right end of the sampling interval");
  exact->add_option("--out", out_file, "output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig c;
    if (!config_path.empty()) c = load_config(config_path);
    if (!case_name.empty()) c.case_name = case_name;
    if (!output_dir.empty()) c.output_directory = output_dir;
    if (cfl) c.cfl = cfl;
    if (t_final) c.t_final = t_final;
    if (relax) c.relax_bounds = true;
    if (no_limit) c.limit = false;

    if (*run) return cmd_run(c);
    if (*conv) {
      if (grids.empty() && meshes.empty()) throw ConfigError("converge: give --grids or --meshes");
      return cmd_converge(c, split_list(grids), split_list(meshes), csv_name);
    }
    if (*info) return peek_mesh_dimension(mesh_path) == 1 ? mesh_info<1>(mesh_path, strict) : mesh_info<2>(mesh_path, strict);
    if (*exact) return cmd_export_exact(c, samples, t_exact, x0, x1, out_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

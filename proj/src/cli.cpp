#include "hyperboloidal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "hyperboloidal/errors.hpp"

namespace hyp {

namespace {

CheckEntry check_max(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol, "max"};
}
CheckEntry check_min(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value >= tol, "min"};
}
CheckEntry info(std::string name, double value) { return {std::move(name), value, 0.0, true, "info"}; }

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const SolverError*>(&e)) return "SolverError";
  if (dynamic_cast<const WeightWindowError*>(&e)) return "WeightWindowError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const FrameError*>(&e)) return "FrameError";
  return "Error";
}

struct Solved {
  SeedData seed;
  SeedReport seed_report;
  InitialData data;
  NewtonReport newton;
};

Solved solve(const RunConfig& cfg, const GridPtr& grid, std::vector<CheckEntry>& checks, Json& rep) {
  const FreeData free = make_free_data(grid, cfg.preset);
  auto [seed, srep] = project_free_to_seed(free, cfg.mode, cfg.pipeline);
  rep["seed"] = to_json(srep);
  auto [data, nrep] = seed_to_data(seed, cfg.pipeline);
  rep["newton"] = to_json(nrep);

  const double lin_tol = cfg.pipeline.linear.tolerance;
  const double verified = std::max({srep.helmholtz_e.verified_residual, srep.helmholtz_b.verified_residual,
                                    srep.vector.verified_residual, nrep.max_linear_residual});
  checks.push_back(check_max("linear solves re-verified", verified, 10.0 * lin_tol));
  checks.push_back(check_max("newton residual", nrep.final_residual, cfg.pipeline.newton.tolerance));
  checks.push_back(check_max("seed trace", srep.trace, cfg.trace_tolerance));

  const ConstraintResiduals res = constraint_residuals(data);
  rep["residuals"] = to_json(res);
  checks.push_back(check_max("hamiltonian residual", res.hamiltonian.sup, cfg.residual_tolerance));
  checks.push_back(check_max("momentum residual", res.momentum.sup, cfg.residual_tolerance));
  checks.push_back(check_max("maxwell E residual", res.maxwell_e.sup, cfg.residual_tolerance));
  checks.push_back(check_max("maxwell B residual", res.maxwell_b.sup, cfg.residual_tolerance));
  checks.push_back(check_max("cmc deviation", res.cmc_deviation, cfg.cmc_tolerance));

  if (cfg.shear_check) {
    const ShearCheck sc = shear_check(data, cfg.mode);
    rep["shear"] = to_json(sc);
    if (sc.applicable) {
      const double h = grid->h();
      const double tol = cfg.shear_tolerance > 0.0 ? cfg.shear_tolerance : cfg.pipeline.bc_constant * h * h;
      checks.push_back(check_max("shear mismatch", sc.mismatch, tol));
    } else {
      CheckEntry e = info("shear check: " + sc.note, 0.0);
      checks.push_back(e);
    }
  } else {
    rep["shear"] = {{"applicable", false}, {"note", "disabled"}};
  }
  return {std::move(seed), srep, std::move(data), std::move(nrep)};
}

void run_solve(const RunConfig& cfg, bool verify, std::vector<CheckEntry>& checks, Json& rep, RunOutput& out) {
  const GridPtr grid = make_grid(cfg.grid_mode, cfg.n);
  rep["grid"] = {{"mode", to_string(cfg.grid_mode)},
                 {"n", cfg.n},
                 {"h", grid->h()},
                 {"interior_nodes", grid->interior_nodes().size()},
                 {"boundary_nodes", grid->boundary_nodes().size()}};
  const Solved s = solve(cfg, grid, checks, rep);

  if (verify) {
    const SeedResiduals sr = seed_residuals(s.seed);
    rep["seed_identities"] = to_json(sr);
    checks.push_back(info("seed momentum identity", sr.momentum.sup));
    checks.push_back(info("seed Div E", sr.div_e.sup));
    checks.push_back(info("seed Div B", sr.div_b.sup));
    if (cfg.fault_epsilon > 0.0) {
      const ConstraintResiduals f = inject_phi_fault(s.seed, s.data, cfg.fault_epsilon);
      rep["phi_fault"] = {{"epsilon", cfg.fault_epsilon}, {"residuals", to_json(f)}};
      checks.push_back(check_min("injected phi fault detected", f.max_sup(), cfg.fault_min_residual));
    }
    if (!cfg.probe_epsilons.empty()) {
      const FreeData free = make_free_data(grid, cfg.preset);
      const PerturbationProbe p = perturbation_probe(free, cfg.mode, cfg.probe_epsilons, cfg.pipeline);
      rep["perturbation_probe"] = to_json(p);
      checks.push_back(info("perturbation response spread", p.spread));
    }
  }

  if (cfg.write_csv && cfg.grid_mode == GridMode::radial1d)
    out.files.emplace_back("profile.csv", radial_profile_csv(s.seed, s.data));
  if (cfg.write_vtk && cfg.grid_mode == GridMode::ball3d) out.files.emplace_back("fields.vtk", ball_vtk(s.data));
}

void run_identities(const RunConfig& cfg, std::vector<CheckEntry>& checks, Json& rep) {
  const ResidualReport r = identity_suite(cfg.n, cfg.pipeline);
  checks = r.checks;
  Json studies = Json::array();
  for (const auto& s : r.studies) studies.push_back(to_json(s));
  rep["studies"] = studies;
}

void run_convergence(const RunConfig& cfg, std::vector<CheckEntry>& checks, Json& rep, RunOutput& out) {
  std::vector<std::pair<std::string, ConvergenceResult>> all;
  Json studies = Json::array();
  for (const auto& problem : cfg.problems) {
    for (auto& r : convergence_study(problem, cfg.resolutions, cfg.preset, cfg.mode, cfg.grid_mode, cfg.pipeline)) {
      studies.push_back(to_json(r));
      if (r.saturated) {
        checks.push_back(info(r.name + " saturated", r.rows.empty() ? 0.0 : r.rows.back().error));
      } else {
        checks.push_back(check_min(r.name + " rate", r.rate, cfg.min_rate));
        if (cfg.max_rate > 0.0) checks.push_back(check_max(r.name + " rate", r.rate, cfg.max_rate));
      }
      all.emplace_back(problem, std::move(r));
    }
  }
  rep["studies"] = studies;
  if (cfg.write_csv) out.files.emplace_back("rates.csv", rate_table_csv(all));
}

}  // namespace

Command parse_command(const std::string& s) {
  if (s == "solve") return Command::solve;
  if (s == "verify") return Command::verify;
  if (s == "identities") return Command::identities;
  if (s == "convergence") return Command::convergence;
  throw ConfigError("unknown command '" + s + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::verify: return "verify";
    case Command::identities: return "identities";
    case Command::convergence: return "convergence";
  }
  return "unknown";
}

RunConfig resolve_config(const CliOptions& opts) {
  RunConfig cfg = load_config(opts.config_path);
  if (opts.grid_n) {
    if (*opts.grid_n < 5) throw ConfigError("--grid-n must be at least 5");
    cfg.n = *opts.grid_n;
  }
  if (opts.mode) {
    try {
      cfg.mode = parse_pipeline_mode(*opts.mode);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (opts.command == Command::convergence) {
    if (cfg.resolutions.size() < 3) throw ConfigError("a convergence study needs at least three resolutions");
    for (std::size_t k = 1; k < cfg.resolutions.size(); ++k)
      if (cfg.resolutions[k] <= cfg.resolutions[k - 1]) throw ConfigError("resolutions must be strictly increasing");
    if (cfg.problems.empty()) throw ConfigError("[convergence] problems is empty");
  }
  if (opts.command == Command::identities && cfg.grid_mode != GridMode::radial1d)
    throw ConfigError("the identity suite runs on the radial grid");
  validate_config(cfg);
  return cfg;
}

RunOutput execute(Command command, const RunConfig& cfg, std::ostream& log) {
  RunOutput out;
  Json& rep = out.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["command"] = to_string(command);
  rep["status"] = "";
  rep["exit_code"] = 0;
  rep["config"] = to_json(cfg);
  std::vector<CheckEntry> checks;
  Json error = nullptr;
  try {
    switch (command) {
      case Command::solve: run_solve(cfg, false, checks, rep, out); break;
      case Command::verify: run_solve(cfg, true, checks, rep, out); break;
      case Command::identities: run_identities(cfg, checks, rep); break;
      case Command::convergence: run_convergence(cfg, checks, rep, out); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    error = {{"kind", error_kind(e)}, {"message", e.what()}};
    out.files.clear();
    log << "ERROR " << error_kind(e) << ": " << e.what() << '\n';
  }

  Json jc = Json::array();
  bool passed = true;
  for (const auto& c : checks) {
    jc.push_back(to_json(c));
    passed = passed && (c.passed || c.kind == "info");
    log << (c.kind == "info" ? "INFO" : c.passed ? "PASS" : "FAIL") << "  " << c.name << "  value=" << c.value;
    if (c.kind != "info") log << (c.kind == "max" ? " <= " : " >= ") << c.tolerance;
    log << '\n';
  }
  rep["checks"] = jc;
  rep["error"] = error;
  out.exit_code = !error.is_null() ? kExitSolverError : passed ? kExitPass : kExitCheckFailure;
  rep["status"] = out.exit_code == kExitPass ? "pass" : out.exit_code == kExitCheckFailure ? "fail" : "error";
  rep["exit_code"] = out.exit_code;
  return out;
}

int run_command(const CliOptions& opts, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = resolve_config(opts);
    if (opts.out_dir.empty()) throw ConfigError("--out is required");
  } catch (const ConfigError& e) {
    log << "CONFIG ERROR: " << e.what() << '\n';
    return kExitConfigError;
  }

  RunOutput out;
  try {
    out = execute(opts.command, cfg, log);
  } catch (const ConfigError& e) {
    log << "CONFIG ERROR: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : out.files) write_atomic(dir / name, content);
    write_atomic(dir / "report.json", dump_json(out.report));
  } catch (const std::exception& e) {
    log << "OUTPUT ERROR: " << e.what() << '\n';
    return kExitSolverError;
  }
  log << "status: " << out.report["status"].get<std::string>() << " (exit " << out.exit_code << ")\n";
  return out.exit_code;
}

}  // namespace hyp

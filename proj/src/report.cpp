#include "hyperboloidal/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hyperboloidal/errors.hpp"

namespace hyp {

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt(v);
}

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) { out += "{}"; return; }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) { out += "[]"; return; }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        dump(v, out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: out += fmt(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

Json doubles(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto '" + path.string() + "'");
  }
}

Json to_json(const RunConfig& c) {
  const PresetParams& p = c.preset;
  const NewtonOptions& nw = c.pipeline.newton;
  Json j;
  j["grid"] = {{"mode", to_string(c.grid_mode)}, {"n", c.n}, {"resolutions", c.resolutions}};
  j["free_data"] = {{"metric", p.metric},
                    {"metric_epsilon", p.metric_epsilon},
                    {"metric_anisotropy", p.metric_anisotropy},
                    {"nu", p.nu},
                    {"nu_amplitude", p.nu_amplitude},
                    {"matter", p.matter},
                    {"e_amplitude", p.e_amplitude},
                    {"b_amplitude", p.b_amplitude},
                    {"j_amplitude", p.j_amplitude},
                    {"zeta_amplitude", p.zeta_amplitude},
                    {"theta_amplitude", p.theta_amplitude},
                    {"phi_star_epsilon", p.phi_star_epsilon}};
  j["pipeline"] = {{"mode", to_string(c.mode)}, {"bc_constant", c.pipeline.bc_constant}};
  j["solver"] = {{"linear_tolerance", c.pipeline.linear.tolerance},
                 {"linear_max_iterations", c.pipeline.linear.max_iterations},
                 {"newton_tolerance", nw.tolerance},
                 {"newton_step_tolerance", nw.step_tolerance},
                 {"newton_max_iterations", nw.max_iterations},
                 {"newton_max_halvings", nw.max_halvings},
                 {"positivity_floor", nw.positivity_floor}};
  j["checks"] = {{"residual_tolerance", c.residual_tolerance},
                 {"trace_tolerance", c.trace_tolerance},
                 {"cmc_tolerance", c.cmc_tolerance},
                 {"shear_check", c.shear_check},
                 {"shear_tolerance", c.shear_tolerance},
                 {"fault_epsilon", c.fault_epsilon},
                 {"fault_min_residual", c.fault_min_residual},
                 {"probe_epsilons", doubles(c.probe_epsilons)}};
  j["convergence"] = {{"problems", c.problems}, {"min_rate", c.min_rate}, {"max_rate", c.max_rate}};
  j["output"] = {{"json", c.write_json}, {"csv", c.write_csv}, {"vtk", c.write_vtk}};
  return j;
}

Json to_json(const LinearSolveReport& r) {
  return {{"solver", r.solver},
          {"iterations", r.iterations},
          {"tolerance", r.tolerance},
          {"residual", r.residual},
          {"verified_residual", r.verified_residual}};
}

Json to_json(const NewtonReport& r) {
  return {{"iterations", r.iterations},
          {"stop_reason", r.stop_reason},
          {"final_residual", r.final_residual},
          {"residual_history", doubles(r.residual_history)},
          {"damping_history", doubles(r.damping_history)},
          {"step_history", doubles(r.step_history)},
          {"floor_hits", r.floor_hits},
          {"max_linear_residual", r.max_linear_residual},
          {"order_estimates", doubles(r.order_estimates())}};
}

Json to_json(const SeedReport& r) {
  return {{"helmholtz_e", to_json(r.helmholtz_e)},
          {"helmholtz_b", to_json(r.helmholtz_b)},
          {"vector_laplacian", to_json(r.vector)},
          {"nu_boundary_ratio", r.nu_boundary_ratio},
          {"sigma_bc_checked", r.sigma_bc_checked},
          {"sigma_bc_mismatch", r.sigma_bc_mismatch},
          {"sigma_bc_mismatch_first_order", r.sigma_bc_mismatch_first},
          {"trace", r.trace}};
}

Json to_json(const NormPair& n) { return {{"sup", n.sup}, {"l2", n.l2}}; }

Json to_json(const ConstraintResiduals& r) {
  return {{"hamiltonian", to_json(r.hamiltonian)},
          {"momentum", to_json(r.momentum)},
          {"maxwell_e", to_json(r.maxwell_e)},
          {"maxwell_b", to_json(r.maxwell_b)},
          {"cmc_deviation", r.cmc_deviation}};
}

Json to_json(const SeedResiduals& r) {
  return {{"momentum", to_json(r.momentum)},
          {"div_e", to_json(r.div_e)},
          {"div_b", to_json(r.div_b)},
          {"trace", r.trace}};
}

Json to_json(const ShearCheck& s) {
  Json j{{"applicable", s.applicable}, {"note", s.note}};
  if (s.applicable) {
    j["mismatch"] = s.mismatch;
    j["mismatch_first_order"] = s.mismatch_first;
    j["tangential"] = s.tangential;
  }
  return j;
}

Json to_json(const CheckEntry& c) {
  return {{"name", c.name}, {"kind", c.kind}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}};
}

Json to_json(const ConvergenceResult& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) rows.push_back({{"n", r.n}, {"h", r.h}, {"error", r.error}});
  return {{"name", c.name},     {"rate", c.rate},           {"constant", c.constant},
          {"saturated", c.saturated}, {"monotone", c.monotone}, {"rows", rows}};
}

Json to_json(const PerturbationProbe& p) {
  return {{"epsilons", doubles(p.epsilons)}, {"ratios", doubles(p.ratios)}, {"spread", p.spread}};
}

std::string radial_profile_csv(const SeedData& seed, const InitialData& data) {
  const Grid& g = *data.g.grid();
  if (g.mode() != GridMode::radial1d) throw DomainError("radial profiles need a radial grid");
  const ScalarField ham = hamiltonian_residual(data);
  const CovectorField mom = momentum_residual(data);
  const auto [div_e, div_b] = maxwell_residual(data);
  std::ostringstream out;
  out << "r,rho,phi,lambda_bar_rr,lambda_bar_tan,sigma_bar_rr,sigma_bar_tan,Sigma_bar_rr,Sigma_bar_tan,"
         "hamiltonian,momentum_r,div_e,div_b\n";
  for (Index i = 0; i < g.size(); ++i) {
    const Matrix3d lam = seed.lambda.bar().mat(i);
    const Matrix3d sig = seed.sigma_bar.mat(i);
    const Matrix3d big = data.sigma_bar.mat(i);
    const double vals[] = {g.r(i),    DefiningFunction::value(g.x(i)), data.phi[i], lam(0, 0), lam(1, 1),
                           sig(0, 0), sig(1, 1),  big(0, 0), big(1, 1),  ham[i],
                           mom.node(i)[0], div_e[i], div_b[i]};
    bool first = true;
    for (double v : vals) {
      if (!first) out << ',';
      first = false;
      out << csv_num(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string rate_table_csv(const std::vector<std::pair<std::string, ConvergenceResult>>& results) {
  std::ostringstream out;
  out << "problem,quantity,n,h,error,fitted_slope,constant,saturated\n";
  for (const auto& [problem, res] : results)
    for (const auto& row : res.rows)
      out << problem << ',' << res.name << ',' << row.n << ',' << csv_num(row.h) << ',' << csv_num(row.error) << ','
          << csv_num(res.rate) << ',' << csv_num(res.constant) << ',' << (res.saturated ? "true" : "false") << '\n';
  return out.str();
}

std::string ball_vtk(const InitialData& data) {
  const Grid& g = *data.g.grid();
  if (g.mode() != GridMode::ball3d || g.is_patch()) throw DomainError("VTK output needs the full ball3d lattice");
  const ScalarField ham = hamiltonian_residual(data);
  const auto& e = g.extent();
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\nhyperboloidal initial data\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
  out << "ORIGIN -1 -1 -1\nSPACING " << fmt(g.h()) << ' ' << fmt(g.h()) << ' ' << fmt(g.h()) << '\n';
  out << "POINT_DATA " << g.size() << '\n';
  auto scalars = [&](const char* name, auto value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < e[2]; ++k)
      for (int j = 0; j < e[1]; ++j)
        for (int i = 0; i < e[0]; ++i) {
          const Index n = g.node(i, j, k);
          out << fmt(g.interior(n) ? value(n) : 0.0) << '\n';
        }
  };
  scalars("phi", [&](Index n) { return data.phi[n]; });
  scalars("rho", [&](Index n) { return DefiningFunction::value(g.x(n)); });
  scalars("hamiltonian_residual", [&](Index n) { return ham[n]; });
  return out.str();
}

}  // namespace hyp

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hyperboloidal/cli.hpp"
#include "hyperboloidal/errors.hpp"

using namespace hyp;
namespace fs = std::filesystem;

namespace {

std::string preset(const std::string& name) { return std::string(HYP_PRESET_DIR) + "/" + name + ".toml"; }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hyp_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("hyp_cfg_" + name + ".toml");
  std::ofstream(p) << text;
  return p;
}

struct Result {
  int code;
  std::string log;
};

Result run(Command c, const std::string& config, const fs::path& out, std::optional<int> n = {},
           std::optional<std::string> mode = {}) {
  CliOptions o;
  o.command = c;
  o.config_path = config;
  o.out_dir = out.string();
  o.grid_n = n;
  o.mode = std::move(mode);
  std::ostringstream log;
  const int code = run_command(o, log);
  return {code, log.str()};
}

Json report(const fs::path& out) { return Json::parse(slurp(out / "report.json")); }

int run_binary(const std::string& args) {
  const int status = std::system((std::string(HYP_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Toml, ParsesSubset) {
  const ConfigTable t = parse_toml(
      "# comment\n[grid]\nmode = \"ball3d\"  # trailing\nn = 33\nresolutions = [1, 2, 3]\n"
      "[checks]\nshear_check = false\nresidual_tolerance = 1e-6\n[convergence]\nproblems = [\"a\", \"b\"]\n");
  EXPECT_EQ(std::get<std::string>(t.at("grid").at("mode")), "ball3d");
  EXPECT_EQ(std::get<double>(t.at("grid").at("n")), 33.0);
  EXPECT_EQ(std::get<std::vector<double>>(t.at("grid").at("resolutions")).size(), 3u);
  EXPECT_FALSE(std::get<bool>(t.at("checks").at("shear_check")));
  EXPECT_EQ(std::get<std::vector<std::string>>(t.at("convergence").at("problems"))[1], "b");
}

TEST(Toml, RejectsMalformedInput) {
  EXPECT_THROW(parse_toml("[grid]\nn = 3\nn = 4\n"), ConfigError);
  EXPECT_THROW(parse_toml("[grid\nn = 3\n"), ConfigError);
  EXPECT_THROW(parse_toml("n = \"open\n"), ConfigError);
  EXPECT_THROW(parse_toml("[grid]\nn 3\n"), ConfigError);
  EXPECT_THROW(parse_toml("[grid]\n[grid]\n"), ConfigError);
  EXPECT_THROW(parse_toml("[grid]\nresolutions = [1,\n 2]\n"), ConfigError);
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_THROW(config_from_table(parse_toml("[grid]\nn = \"big\"\n")), ConfigError);
  EXPECT_THROW(config_from_table(parse_toml("[grid]\nn = 2\n")), ConfigError);
  EXPECT_THROW(config_from_table(parse_toml("[grid]\nn = 17.5\n")), ConfigError);
  EXPECT_THROW(config_from_table(parse_toml("[solver]\nlinear_tolerance = -1\n")), ConfigError);
  EXPECT_THROW(config_from_table(parse_toml("[extras]\nx = 1\n")), ConfigError);
  EXPECT_THROW(config_from_table(parse_toml("[grid]\nmode = \"cube\"\n")), ConfigError);
  EXPECT_THROW(config_from_table(parse_toml("[convergence]\nproblems = [\"nope\"]\n")), ConfigError);
  const RunConfig c = config_from_table(parse_toml(""));
  EXPECT_EQ(c.n, 257);
  EXPECT_EQ(c.grid_mode, GridMode::radial1d);
}

TEST(Cli, HyperboloidSolve) {
  const fs::path out = fresh_dir("hyperboloid");
  const auto start = std::chrono::steady_clock::now();
  const Result r = run(Command::solve, preset("hyperboloid"), out);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
  ASSERT_EQ(r.code, kExitPass) << r.log;
  const Json j = report(out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["grid"]["n"], 1024);
  for (const char* k : {"hamiltonian", "momentum", "maxwell_e", "maxwell_b"})
    EXPECT_LE(j["residuals"][k]["sup"].get<double>(), 1e-8) << k;
  EXPECT_LE(j["shear"]["mismatch"].get<double>(), 1e-8);
  EXPECT_TRUE(fs::exists(out / "profile.csv"));
  EXPECT_EQ(slurp(out / "profile.csv").substr(0, 6), "r,rho,");
  EXPECT_NE(r.log.find("PASS  hamiltonian residual"), std::string::npos);
}

TEST(Cli, VerifyMatterPreset) {
  const fs::path out = fresh_dir("verify");
  const Result r = run(Command::verify, preset("perturbed"), out);
  ASSERT_EQ(r.code, kExitPass) << r.log;
  const Json j = report(out);
  EXPECT_GE(j["phi_fault"]["residuals"]["hamiltonian"]["sup"].get<double>(), 1e-4);
  EXPECT_TRUE(j.contains("seed_identities"));
  EXPECT_TRUE(j.contains("perturbation_probe"));
}

TEST(Cli, WeakShearNotApplicable) {
  const fs::path out = fresh_dir("weak");
  const Result r = run(Command::solve, preset("weak"), out);
  ASSERT_EQ(r.code, kExitPass) << r.log;
  const Json j = report(out);
  EXPECT_FALSE(j["shear"]["applicable"].get<bool>());
  EXPECT_EQ(j["shear"]["note"], "not-applicable");
  EXPECT_NE(r.log.find("shear check: not-applicable"), std::string::npos);
}

TEST(Cli, ConfigErrorsWriteNothing) {
  const fs::path out = fresh_dir("config_error");
  const fs::path bad = write_config("unknown_key", "[grid]\nn = 65\nsize = 3\n");
  EXPECT_EQ(run(Command::solve, bad.string(), out).code, kExitConfigError);
  EXPECT_FALSE(fs::exists(out));

  const fs::path two = write_config("two_res", "[grid]\nresolutions = [65, 129]\n");
  EXPECT_EQ(run(Command::convergence, two.string(), out).code, kExitConfigError);
  EXPECT_FALSE(fs::exists(out));

  EXPECT_EQ(run(Command::solve, preset("weak"), out, {}, "shearfree").code, kExitConfigError);
  EXPECT_EQ(run(Command::solve, "/nonexistent/config.toml", out).code, kExitConfigError);
  EXPECT_EQ(run(Command::identities, preset("ball_smoke"), out).code, kExitConfigError);
  EXPECT_FALSE(fs::exists(out));
}

// A Lipschitz metric is outside the shear-free class and is rejected before any solve.
TEST(Cli, DecayClassCheckedAtLoad) {
  const fs::path out = fresh_dir("decay");
  const fs::path cfg = write_config("decay", "[free_data]\nmetric = \"weak-lipschitz\"\nmetric_epsilon = 0.2\n"
                                            "[checks]\nresidual_tolerance = 1e-3\n");
  EXPECT_EQ(run(Command::solve, cfg.string(), out).code, kExitConfigError);
  EXPECT_EQ(run(Command::solve, cfg.string(), out, {}, "weak").code, kExitPass);
}

TEST(Cli, ModeAndGridOverrides) {
  const fs::path out = fresh_dir("override");
  ASSERT_EQ(run(Command::solve, preset("perturbed"), out, 129, "weak").code, kExitPass);
  const Json j = report(out);
  EXPECT_EQ(j["grid"]["n"], 129);
  EXPECT_EQ(j["config"]["pipeline"]["mode"], "weak");
  EXPECT_EQ(run(Command::solve, preset("perturbed"), out, 3).code, kExitConfigError);
}

TEST(Cli, SolverErrorKeepsReport) {
  const fs::path out = fresh_dir("solver_error");
  const fs::path cfg = write_config("solver_error",
                                    "[free_data]\nmetric = \"perturbed\"\nmetric_epsilon = 0.3\nmatter = \"maxwell-fluid\"\n"
                                    "e_amplitude = 0.3\nzeta_amplitude = 0.1\n[solver]\nnewton_max_iterations = 1\n");
  const Result r = run(Command::solve, cfg.string(), out);
  EXPECT_EQ(r.code, kExitSolverError);
  const Json j = report(out);
  EXPECT_EQ(j["status"], "error");
  EXPECT_EQ(j["error"]["kind"], "SolverError");
  EXPECT_FALSE(fs::exists(out / "profile.csv"));
}

TEST(Cli, IdentitiesCommand) {
  const fs::path out = fresh_dir("identities");
  const auto start = std::chrono::steady_clock::now();
  const Result r = run(Command::identities, preset("identities"), out);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 60.0);
  EXPECT_EQ(r.code, kExitPass) << r.log;
  EXPECT_FALSE(report(out)["studies"].empty());
}

TEST(Cli, ConvergenceRateTable) {
  const fs::path out = fresh_dir("convergence");
  const Result r = run(Command::convergence, preset("manufactured"), out);
  ASSERT_EQ(r.code, kExitPass) << r.log;
  const std::string csv = slurp(out / "rates.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "problem,quantity,n,h,error,fitted_slope,constant,saturated");
  const double rate = report(out)["studies"][0]["rate"].get<double>();
  EXPECT_NEAR(rate, 2.0, 0.2);
}

TEST(Cli, FailedCheckExitsOne) {
  const fs::path out = fresh_dir("check_failure");
  const fs::path cfg = write_config("check_failure", "[grid]\nn = 65\n[free_data]\nmetric = \"perturbed\"\n"
                                                     "metric_epsilon = 0.3\n[checks]\nresidual_tolerance = 1e-12\n");
  const Result r = run(Command::solve, cfg.string(), out);
  EXPECT_EQ(r.code, kExitCheckFailure);
  EXPECT_EQ(report(out)["status"], "fail");
  EXPECT_NE(r.log.find("FAIL  hamiltonian residual"), std::string::npos);
}

TEST(Cli, ByteIdenticalReports) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  ASSERT_EQ(run(Command::verify, preset("perturbed"), a).code, kExitPass);
  ASSERT_EQ(run(Command::verify, preset("perturbed"), b).code, kExitPass);
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "profile.csv"), slurp(b / "profile.csv"));
}

TEST(Json, Formatting) {
  Json j;
  j["x"] = 0.1;
  j["nan"] = std::nan("");
  j["inf"] = HUGE_VAL;
  j["n"] = 3;
  j["a"] = Json::array({1.5, true});
  const std::string s = dump_json(j);
  EXPECT_NE(s.find("\"x\": 0.10000000000000001"), std::string::npos) << s;
  EXPECT_NE(s.find("\"nan\": null"), std::string::npos);
  EXPECT_NE(s.find("\"inf\": null"), std::string::npos);
  EXPECT_NE(s.find("\"n\": 3"), std::string::npos);
  EXPECT_LT(s.find("\"x\""), s.find("\"nan\""));
  EXPECT_EQ(Json::parse(s)["a"][0].get<double>(), 1.5);
}

TEST(Json, AtomicWrite) {
  const fs::path dir = fresh_dir("atomic");
  fs::create_directories(dir);
  write_atomic(dir / "f.txt", "one");
  write_atomic(dir / "f.txt", "two");
  EXPECT_EQ(slurp(dir / "f.txt"), "two");
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++count;
  }
  EXPECT_EQ(count, 1);
}

TEST(Binary, ExitCodes) {
  const fs::path out = fresh_dir("binary");
  EXPECT_EQ(run_binary("solve --config " + preset("hyperboloid") + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_EQ(run_binary("solve --out " + out.string()), 3);
  EXPECT_EQ(run_binary("frobnicate --config x --out y"), 3);
  EXPECT_EQ(run_binary("solve --config " + preset("weak") + " --out " + out.string() + " --mode bogus"), 3);
  EXPECT_EQ(run_binary("--help"), 0);
}

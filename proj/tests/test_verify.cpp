#include <gtest/gtest.h>

#include <chrono>

#include "hyperboloidal/errors.hpp"
#include "hyperboloidal/verify.hpp"
#include "support.hpp"

using namespace hyp;

namespace {

PresetParams matter_preset() {
  PresetParams p;
  p.metric = "perturbed";
  p.metric_epsilon = 0.3;
  p.nu = "decaying";
  p.nu_amplitude = 0.5;
  p.matter = "maxwell-fluid";
  p.e_amplitude = 0.3;
  p.b_amplitude = 0.2;
  p.j_amplitude = 0.2;
  p.zeta_amplitude = 0.1;
  return p;
}

PresetParams weak_preset() {
  PresetParams p = matter_preset();
  p.metric = "weak-lipschitz";
  p.metric_epsilon = 0.2;
  p.nu = "weak";
  p.nu_amplitude = 0.3;
  return p;
}

struct Solved {
  SeedData seed;
  InitialData data;
};

Solved run(int n, const PresetParams& p, PipelineMode mode) {
  const GridPtr g = make_grid(GridMode::radial1d, n);
  SeedData seed = project_free_to_seed(make_free_data(g, p), mode).first;
  InitialData data = seed_to_data(seed).first;
  return {std::move(seed), std::move(data)};
}

void expect_rates(const std::vector<ConvergenceResult>& results, double min_rate) {
  ASSERT_FALSE(results.empty());
  for (const auto& r : results) {
    EXPECT_FALSE(r.saturated) << r.name;
    EXPECT_GE(r.rate, min_rate) << r.name;
  }
}

}  // namespace

TEST(Residuals, HyperboloidRoundtrip) {
  const auto start = std::chrono::steady_clock::now();
  const Solved r = run(1024, PresetParams{}, PipelineMode::shearfree);
  const ConstraintResiduals c = constraint_residuals(r.data);
  EXPECT_LE(c.hamiltonian.sup, 1e-8);
  EXPECT_LE(c.momentum.sup, 1e-9);
  EXPECT_LE(c.maxwell_e.sup, 1e-9);
  EXPECT_LE(c.maxwell_b.sup, 1e-9);
  EXPECT_LE(c.cmc_deviation, 1e-11);
  EXPECT_LE(c.hamiltonian.l2, c.hamiltonian.sup);
  for (Index n = 0; n < r.data.phi.size(); ++n) EXPECT_NEAR(r.data.phi[n], 1.0, 1e-10);
  const ShearCheck s = shear_check(r.data, PipelineMode::shearfree);
  EXPECT_TRUE(s.applicable);
  EXPECT_LE(s.mismatch, 1e-8);
  EXPECT_LE(s.tangential, 1e-8);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

TEST(Residuals, MatterConstraintsConverge) {
  expect_rates(convergence_study("constraints", {129, 257, 513}, matter_preset(), PipelineMode::shearfree,
                                 GridMode::radial1d),
               1.8);
}

TEST(Residuals, SeedIdentitiesConverge) {
  expect_rates(convergence_study("momentum-identity", {129, 257, 513}, matter_preset(), PipelineMode::shearfree,
                                 GridMode::radial1d),
               1.8);
}

TEST(Residuals, WeakConstraintsConverge) {
  expect_rates(convergence_study("constraints", {129, 257, 513}, weak_preset(), PipelineMode::weak, GridMode::radial1d),
               1.5);
}

TEST(Residuals, InjectedFaultsAreDetected) {
  const Solved r = run(257, matter_preset(), PipelineMode::shearfree);
  const double clean = constraint_residuals(r.data).max_sup();
  const ConstraintResiduals f = inject_phi_fault(r.seed, r.data, 1e-3);
  EXPECT_GE(f.max_sup(), 1e-4);
  EXPECT_GT(f.max_sup(), 10.0 * clean);
  EXPECT_GT(inject_sigma_fault(r.data, 1e-3).momentum.sup, 10.0 * clean);
  EXPECT_GT(inject_e_fault(r.data, 1e-3).maxwell_e.sup, 10.0 * clean);
  EXPECT_LE(inject_phi_fault(r.seed, r.data, 0.0).max_sup(), clean * (1.0 + 1e-12));
}

// Div_{φ⁴λ}(φ⁻²σ) = φ⁻⁶Div_λσ, and the matter terms scale the same way.
TEST(Residuals, SeedAndDataMomentumAgree) {
  std::vector<double> hs, es;
  for (int n : {129, 257, 513}) {
    const Solved r = run(n, matter_preset(), PipelineMode::shearfree);
    const CovectorField a = momentum_residual(r.data), b = seed_momentum_residual(r.seed);
    double e = 0.0;
    for (Index k : r.data.phi.grid()->interior_nodes())
      e = std::max(e, (a.vec(k) - std::pow(r.data.phi[k], -6) * b.vec(k)).norm());
    hs.push_back(r.data.phi.grid()->h());
    es.push_back(e);
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(ShearCheck, ConvergesForShearFreeData) {
  std::vector<double> hs, es;
  for (int n : {129, 257, 513}) {
    const Solved r = run(n, matter_preset(), PipelineMode::shearfree);
    const ShearCheck s = shear_check(r.data, PipelineMode::shearfree);
    ASSERT_TRUE(s.applicable);
    hs.push_back(r.data.phi.grid()->h());
    es.push_back(s.mismatch);
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(ShearCheck, WeakData) {
  const Solved r = run(257, weak_preset(), PipelineMode::weak);
  const ShearCheck s = shear_check(r.data, PipelineMode::weak);
  EXPECT_FALSE(s.applicable);
  EXPECT_EQ(s.note, "not-applicable");
  // Spherical symmetry makes every boundary umbilic, so only an injected violation can show.
  InitialData bad = r.data;
  const GridPtr& g = bad.phi.grid();
  for (Index n = 0; n < g->size(); ++n) {
    const Vector3d& x = g->x(n);
    bad.sigma_bar.set_mat(n, bad.sigma_bar.mat(n) + 1e-2 * (x * x.transpose() - x.squaredNorm() / 3.0 * Matrix3d::Identity()));
  }
  EXPECT_GT(shear_check(bad, PipelineMode::shearfree).mismatch, 5e-3);
}

TEST(IdentitySuite, PassesQuickly) {
  const auto start = std::chrono::steady_clock::now();
  const ResidualReport rep = identity_suite(512);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 60.0);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed || c.kind == "info") << c.name << " = " << c.value;
  EXPECT_TRUE(rep.passed());
  EXPECT_FALSE(rep.studies.empty());
}

TEST(ConvergenceStudy, Problems) {
  PresetParams p;
  p.phi_star_epsilon = 0.1;
  const auto m = convergence_study("manufactured-lichnerowicz", {128, 256, 512, 1024}, p, PipelineMode::shearfree,
                                   GridMode::radial1d);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m[0].rate, 2.0, 0.2);
  EXPECT_TRUE(m[0].monotone);

  const auto h = convergence_study("hyperboloid", {65, 129, 257}, PresetParams{}, PipelineMode::shearfree,
                                   GridMode::radial1d);
  for (const auto& r : h) EXPECT_TRUE(r.saturated) << r.name;

  expect_rates(convergence_study("gauge", {129, 257, 513}, matter_preset(), PipelineMode::shearfree, GridMode::radial1d),
               1.8);
  expect_rates(convergence_study("h-covariance", {256, 512, 1024}, p, PipelineMode::shearfree, GridMode::radial1d), 1.8);

  EXPECT_THROW(convergence_study("hyperboloid", {65, 129}, p, PipelineMode::shearfree, GridMode::radial1d), DomainError);
  EXPECT_THROW(convergence_study("hyperboloid", {129, 65, 257}, p, PipelineMode::shearfree, GridMode::radial1d),
               DomainError);
  EXPECT_THROW(convergence_study("nope", {65, 129, 257}, p, PipelineMode::shearfree, GridMode::radial1d), DomainError);
}

TEST(FitRate, ExactPowerLaw) {
  std::vector<StudyRow> rows;
  for (int n : {10, 20, 40, 80}) rows.push_back({n, 1.0 / n, 3.0 * std::pow(1.0 / n, 2)});
  const ConvergenceResult r = fit_rate("x", rows);
  EXPECT_NEAR(r.rate, 2.0, 1e-12);
  EXPECT_NEAR(r.constant, 3.0, 1e-10);
  EXPECT_TRUE(r.monotone);
  EXPECT_FALSE(r.saturated);

  for (auto& row : rows) row.error = 1e-14;
  EXPECT_TRUE(fit_rate("y", rows).saturated);
}

TEST(PerturbationProbe, LinearResponse) {
  const GridPtr g = make_grid(GridMode::radial1d, 257);
  const PerturbationProbe p = perturbation_probe(make_free_data(g, matter_preset()), PipelineMode::shearfree, {1e-3, 1e-4});
  ASSERT_EQ(p.ratios.size(), 2u);
  EXPECT_GT(p.ratios[0], 0.0);
  EXPECT_LE(p.spread, 1.01);
}

#pragma once

#include <string>
#include <vector>

#include "hyperboloidal/pipeline.hpp"
#include "hyperboloidal/presets.hpp"

namespace hyp {

/// Sup and discrete L² (radial weight r², uniform in ball3d) norms over interior nodes.
struct NormPair {
  double sup = 0.0;
  double l2 = 0.0;
};

template <int R>
NormPair norms(const Field<R>& f);

/// R[g] - |K|²_g + τ² - |E|²_g - |B|²_g - 2ξ with K = Σ - g, τ = -3, written with
/// |Σ|²_g = ρ²|Σ̄|²_ḡ, tr_gΣ = ρ tr_ḡΣ̄, |E|²_g = ρ⁻²ḡ(E, E).
ScalarField hamiltonian_residual(const InitialData& data);
/// Div_gΣ - (E ×_g B + J)^♭ = ρ Div_ḡΣ̄ - 2Σ̄(grad_ḡρ) - ρ⁻³ (E ×_ḡ B)^♭ - ρ⁻² J^♭.
CovectorField momentum_residual(const InitialData& data);
/// (Div_g E, Div_g B).
std::pair<ScalarField, ScalarField> maxwell_residual(const InitialData& data);

/// Div_λσ - (j + 𝓔 ×_λ 𝓑)^♭ in the same compact form.
CovectorField seed_momentum_residual(const SeedData& seed);

struct ConstraintResiduals {
  NormPair hamiltonian;
  NormPair momentum;
  NormPair maxwell_e;
  NormPair maxwell_b;
  double cmc_deviation = 0.0;  ///< sup |tr_g K + 3| = sup ρ|tr_ḡΣ̄|
  double max_sup() const;
};
ConstraintResiduals constraint_residuals(const InitialData& data);

struct SeedResiduals {
  NormPair momentum;
  NormPair div_e;
  NormPair div_b;
  double trace = 0.0;
};
SeedResiduals seed_residuals(const SeedData& seed);

struct ShearCheck {
  bool applicable = false;
  std::string note;
  double mismatch = 0.0;        ///< second-order extrapolation of ρΣ against 𝓗_ḡ(ρ)
  double mismatch_first = 0.0;  ///< first-order extrapolation
  double tangential = 0.0;      ///< |Σ̄|_T + χ̂|
};
ShearCheck shear_check(const InitialData& data, PipelineMode mode);

/// One pass/fail line of a suite.
struct CheckEntry {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// "max" (value ≤ tolerance), "min" (value ≥ tolerance) or "info".
  std::string kind = "max";
};

struct StudyRow {
  int n = 0;
  double h = 0.0;
  double error = 0.0;
};

struct ConvergenceResult {
  std::string name;
  std::vector<StudyRow> rows;
  double rate = 0.0;
  double constant = 0.0;  ///< C in error ≈ C hᵖ
  bool saturated = false;
  bool monotone = true;
};

struct ResidualReport {
  std::vector<CheckEntry> checks;
  std::vector<ConvergenceResult> studies;
  bool passed() const;
};

/// Least-squares slope of log error against log h; saturated when every error < 1e-12.
ConvergenceResult fit_rate(std::string name, std::vector<StudyRow> rows);

/// Problems: manufactured-lichnerowicz, hyperboloid, momentum-identity, constraints, gauge,
/// h-covariance. Returns one result per measured quantity.
std::vector<ConvergenceResult> convergence_study(const std::string& problem, const std::vector<int>& resolutions,
                                                 const PresetParams& params, PipelineMode mode, GridMode grid_mode,
                                                 const PipelineOptions& opts = {});
const std::vector<std::string>& convergence_problems();

/// 𝓗 and tensor_ops identities on the hyperbolic background and 3D patches.
ResidualReport identity_suite(int n, const PipelineOptions& opts = {});

struct PerturbationProbe {
  std::vector<double> epsilons;
  std::vector<double> ratios;  ///< ‖ΔInitialData‖ / ε
  double spread = 0.0;         ///< max ratio / min ratio
};
/// Perturbs ν̄ and ζ of the free data by ε in sup norm and measures the response.
PerturbationProbe perturbation_probe(const FreeData& free, PipelineMode mode, const std::vector<double>& epsilons,
                                     const PipelineOptions& opts = {});

/// Rebuilds the data with φ → φ(1 + ε b), b = 4ρ(1 - ρ) on [0, ½], and returns the residuals.
ConstraintResiduals inject_phi_fault(const SeedData& seed, const InitialData& data, double epsilon);
/// Σ̄ → Σ̄ + ε ρ tf(x⊗x) and E → E + ε ρ² x.
ConstraintResiduals inject_sigma_fault(const InitialData& data, double epsilon);
ConstraintResiduals inject_e_fault(const InitialData& data, double epsilon);

}  // namespace hyp

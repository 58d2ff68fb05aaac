#pragma once

#include <string>

#include "hyperboloidal/data.hpp"
#include "hyperboloidal/defining_tensor.hpp"
#include "hyperboloidal/elliptic.hpp"
#include "hyperboloidal/lichnerowicz.hpp"

namespace hyp {

enum class PipelineMode { shearfree, weak };

PipelineMode parse_pipeline_mode(const std::string& s);
std::string to_string(PipelineMode m);

/// t⊙(E, B, J, ξ) = (t⁻³E, t⁻³B, t⁻⁵J, t⁻⁴ξ).
MatterFields matter_scale(const ScalarField& t, const MatterFields& fields);

/// ρ²λ̄⁻¹(ρ Div_λ̄ T̄ - 2 T̄(grad_λ̄ ρ)) - j - 𝓔 ×_λ 𝓑, i.e. (Div_λ(ρ⁻¹T̄))^♯ - j - 𝓔×𝓑,
/// on interior nodes. T̄ must be λ̄-trace-free.
VectorField momentum_source(const Metric& lambda, const SymTensor2Field& t_bar, const MatterFields& psi);

struct SeedReport {
  LinearSolveReport helmholtz_e;
  LinearSolveReport helmholtz_b;
  LinearSolveReport vector;
  double nu_boundary_ratio = 0.0;  ///< |ν̄| at ∂M over sup |ν̄|: zero for ν in C_2
  bool sigma_bc_checked = false;
  double sigma_bc_mismatch = 0.0;  ///< second-order extrapolation
  double sigma_bc_mismatch_first = 0.0;
  double trace = 0.0;
};

struct PipelineOptions {
  SolverOptions linear;
  NewtonOptions newton;
  /// sigmaBC tolerance in shear-free mode: bc_constant · h².
  double bc_constant = 50.0;
};

/// Ξ: free data to seed data.
std::pair<SeedData, SeedReport> project_free_to_seed(const FreeData& free, PipelineMode mode,
                                                     const PipelineOptions& opts = {});

/// ι(λ, σ, Ψ) = (λ, σ - ρ⁻¹𝓗, Ψ).
FreeData right_inverse(const SeedData& seed);

/// Π: seed data to initial data.
std::pair<InitialData, NewtonReport> seed_to_data(const SeedData& seed, const PipelineOptions& opts = {});

/// (θ⁴λ, θ⁻²σ, θ²⊙Ψ).
SeedData gauge_transform(const SeedData& seed, const ScalarField& theta);

}  // namespace hyp

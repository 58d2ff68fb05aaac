#pragma once

#include <string>
#include <vector>

#include "hyperboloidal/data.hpp"

namespace hyp {

/// Closed-form free data. Metric presets give λ̄:
///   hyperbolic      δ
///   perturbed       δ + ε ρ² (x⊗x + a v⊗v), v = (1 + x₂, x₃, 0)
///   weak-lipschitz  δ + ε ρ x⊗x
/// ν̄ presets: none, decaying (A ρ tf(x⊗x)), weak (A tf(x⊗x)).
/// Matter presets: none, maxwell-fluid with e = a_e ρ² (x + r_e), b = a_b ρ² (x + r_b),
/// j = a_j ρ³ x, ζ = a_ζ ρ², where r_e = (-x₂, x₁, 0) and r_b = (0, -x₃, x₂) in ball3d.
struct PresetParams {
  std::string metric = "hyperbolic";
  double metric_epsilon = 0.0;
  double metric_anisotropy = 0.0;
  std::string nu = "none";
  double nu_amplitude = 0.0;
  std::string matter = "none";
  double e_amplitude = 0.0;
  double b_amplitude = 0.0;
  double j_amplitude = 0.0;
  double zeta_amplitude = 0.0;
  double theta_amplitude = 0.0;
  double phi_star_epsilon = 0.1;
};

const std::vector<std::string>& metric_presets();
const std::vector<std::string>& nu_presets();
const std::vector<std::string>& matter_presets();

/// Throws DomainError for unknown names, non-finite amplitudes, or presets that break the
/// symmetry of the grid mode.
void validate_preset(const PresetParams& p, GridMode mode);

Metric preset_metric(const GridPtr& grid, const PresetParams& p);
FreeData make_free_data(const GridPtr& grid, const PresetParams& p);
/// θ = 1 + a ρ.
ScalarField preset_theta(const GridPtr& grid, double amplitude);

}  // namespace hyp

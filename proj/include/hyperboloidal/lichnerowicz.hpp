#pragma once

#include <string>
#include <vector>

#include "hyperboloidal/data.hpp"
#include "hyperboloidal/elliptic.hpp"

namespace hyp {

/// Coefficients of Δ_λφ - ⅛Rφ + Aφ⁻⁷ + Bφ⁻³ - ¾φ⁵ = 0 with
/// A = ⅛|σ|²_λ, B = ⅛(|𝓔|²_λ + |𝓑|²_λ + 2ζ), R = R[λ].
struct LichCoefficients {
  ScalarField A;
  ScalarField B;
  ScalarField R;
};

struct NewtonOptions {
  double tolerance = 1e-10;
  double step_tolerance = 1e-12;
  int max_iterations = 50;
  int max_halvings = 12;
  double positivity_floor = 0.05;
  SolverOptions linear;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;  ///< sup-norm, entry 0 is the initial guess
  std::vector<double> damping_history;
  std::vector<double> step_history;
  int floor_hits = 0;
  double final_residual = 0.0;
  std::string stop_reason;
  double max_linear_residual = 0.0;

  /// Convergence-order estimates log(r_{k+1}/r_k) / log(r_k/r_{k-1}) over consecutive
  /// undamped steps. Triples ending below `floor` sit at the roundoff level and are skipped.
  std::vector<double> order_estimates(double floor = 1e-9) const;
};

LichCoefficients assemble_coefficients(const SeedData& seed);

/// Pointwise residual on interior nodes (zero elsewhere).
ScalarField lichnerowicz_residual(const Metric& lambda, const LichCoefficients& c, const ScalarField& phi);

std::pair<ScalarField, NewtonReport> solve_lichnerowicz(const Metric& lambda, const LichCoefficients& c,
                                                        const NewtonOptions& opts = {});

/// φ* = 1 + ε sin(πρ); B* ≥ 0 for every ε ≥ 0 on the hyperbolic background.
ScalarField manufactured_target(const GridPtr& grid, double epsilon);

/// A = 0 and B chosen so that φ* solves the equation; B = φ*³(¾φ*⁵ + ⅛Rφ* - Δ_λφ*)
/// with a fourth-order Laplacian.
LichCoefficients manufactured_source(const Metric& lambda, const ScalarField& phi_star);

}  // namespace hyp

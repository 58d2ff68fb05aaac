#pragma once

#include "hyperboloidal/geometry.hpp"

namespace hyp {

/// Matter quadruple: (e, b, j, ζ) for free data, (𝓔, 𝓑, j, ζ) for seeds and (E, B, J, ξ)
/// for initial data. Vectors carry coordinate components of the physical fields.
struct MatterFields {
  VectorField e;
  VectorField b;
  VectorField j;
  ScalarField zeta;

  static MatterFields zero(const GridPtr& grid) {
    return {VectorField(grid), VectorField(grid), VectorField(grid), ScalarField(grid)};
  }
};

/// Free data (λ, ν, Υ). λ is physical; ν is stored as ν̄ = ρν.
struct FreeData {
  Metric lambda;
  SymTensor2Field nu_bar;
  MatterFields matter;
};

/// Seed data (λ, σ, Ψ) with σ stored as σ̄ = ρσ.
struct SeedData {
  Metric lambda;
  SymTensor2Field sigma_bar;
  MatterFields psi;
};

/// Initial data (g, K = Σ - g, Φ) with Σ stored as Σ̄ = ρΣ; φ is the conformal factor
/// that produced it.
struct InitialData {
  Metric g;
  SymTensor2Field sigma_bar;
  MatterFields matter;
  ScalarField phi;
};

}  // namespace hyp

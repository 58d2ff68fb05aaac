#pragma once

#include <vector>

#include "hyperboloidal/geometry.hpp"

namespace hyp {

/// Values of a tensor field at the boundary nodes of its grid. `values` holds one column
/// of Cartesian components per entry of `nodes`.
struct BoundaryTrace {
  GridPtr grid;
  int rank = 0;
  int order = 2;
  std::vector<Index> nodes;
  Eigen::MatrixXd values;

  Matrix3d mat(std::size_t k) const;
  double sup_distance(const BoundaryTrace& other) const;
};

/// A = ½ |dρ|_ḡ Div_ḡ(|dρ|_ḡ grad_ḡ ρ).
ScalarField A_scalar(const Metric& gbar, const DefiningFunction& rho);

/// 𝓗_ḡ(ρ) in the expanded form m²(Hρ - ⅓Δρ ḡ) - ½m(dm⊗dρ + dρ⊗dm) + ⅓m⟨dρ,dm⟩ ḡ
/// + A(dρ⊗dρ - ⅓m ḡ), m = |dρ|²_ḡ, dm = 2 Hρ(grad ρ, ·). No division by |dρ|.
SymTensor2Field H_tensor(const Metric& gbar, const DefiningFunction& rho);

/// Trace-free second fundamental form χ̂ of ∂M for the inward normal grad_ḡ ρ, with
/// χ(X, Y) = ḡ(∇_X Y, N) = -Hess ρ(X, Y)/|dρ|, as a covariant tensor that vanishes on N.
BoundaryTrace shear_tensor(const Metric& gbar);

/// Polynomial extrapolation of interior values to the boundary nodes (order 1 or 2).
template <int R>
BoundaryTrace boundary_restrict(const Field<R>& f, int order = 2);

/// max over boundary nodes of |Σ̄(e_a, e_b) + χ̂_ab| in a ḡ-orthonormal tangential frame.
double tangential_shear_mismatch(const Metric& gbar, const BoundaryTrace& sigma_bar, const BoundaryTrace& chi);

}  // namespace hyp

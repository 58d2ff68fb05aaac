#pragma once

#include "hyperboloidal/geometry.hpp"

namespace hyp {

/// grad_g f = g⁻¹ df. Defined at every node (physical: ρ² ḡ⁻¹ df).
VectorField gradient(const Metric& g, const ScalarField& f, int order = 2);
/// Hess_g f = ∂∂f - Γ df with compact second differences.
SymTensor2Field hessian(const Metric& g, const ScalarField& f, int order = 2);
/// Δ_g f = tr_g Hess_g f. Physical metrics use ρ² Δ̄f - ρ⟨dρ, df⟩_ḡ, finite up to ρ = 0.
ScalarField laplacian(const Metric& g, const ScalarField& f, int order = 2);

ScalarField divergence(const Metric& g, const VectorField& v);
/// (Div T)_j = g^{ik} ∇_i T_kj for a symmetric covariant 2-tensor.
CovectorField divergence(const Metric& g, const SymTensor2Field& t);

ScalarField scalar_curvature(const Metric& g, int order = 2);

/// 𝒟X = ½ ℒ_X g - ⅓ (Div X) g (covariant).
SymTensor2Field conformal_killing(const Metric& g, const VectorField& x, int order = 2);

/// L W = -(Div 𝒟W)^♯. Radial physical metrics use the conservative form built from the
/// midpoint conformal Killing profile and its adjoint divergence; otherwise the covariant
/// expansion with compact second differences. Values on interior nodes.
VectorField vector_laplacian_apply(const Metric& g, const VectorField& w);

/// ρ⁻ᵖ L(ρᵖU) for a radial physical metric, at interior nodes and on ∂M (p = 1, 2, 3).
/// The singular coefficients are applied exactly, so only U is differenced; on ∂M this
/// is the indicial limit, which involves no derivatives of U.
VectorField reduced_vector_laplacian(const Metric& g, const VectorField& u, int power = 3);

/// Quadrature weights of the discrete L² inner product ∫ g(V, W) dV that makes the radial
/// vector Laplacian symmetric (radial physical metrics).
Eigen::VectorXd radial_vector_mass(const Metric& g);

/// (X ×_g Y)^k = g^{kl} ε_{lij} X^i Y^j with ε the right-handed metric volume form.
VectorField cross(const Metric& g, const VectorField& x, const VectorField& y);

/// T - ⅓ (tr_g T) g. Conformally invariant, so evaluated with ḡ at every node.
SymTensor2Field trace_free_part(const Metric& g, const SymTensor2Field& t);
/// θ^exponent g with caches rebuilt.
Metric conformal_rescale(const Metric& g, const ScalarField& theta, double exponent);

/// tr_g T.
ScalarField trace(const Metric& g, const SymTensor2Field& t);
/// |T|²_g for a covariant 2-tensor.
ScalarField norm_squared(const Metric& g, const SymTensor2Field& t);
/// g(X, X) for a vector.
ScalarField norm_squared(const Metric& g, const VectorField& v);
/// X^♭ and ω^♯.
CovectorField lower(const Metric& g, const VectorField& v);
VectorField raise(const Metric& g, const CovectorField& w);
/// T(V, ·).
CovectorField contract(const SymTensor2Field& t, const VectorField& v);

}  // namespace hyp

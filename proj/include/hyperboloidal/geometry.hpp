#pragma once

#include <array>
#include <utility>

#include "hyperboloidal/field.hpp"

namespace hyp {

using Eigen::Matrix3d;
using Eigen::Vector3d;

/// ρ = c (1 - |x|²)/2 with analytic derivatives dρ = -c x, Hess ρ = -c δ.
class DefiningFunction {
 public:
  DefiningFunction() = default;
  explicit DefiningFunction(GridPtr grid, double scale = 1.0);

  static double value(const Vector3d& x, double scale = 1.0) { return 0.5 * scale * (1.0 - x.squaredNorm()); }
  static Vector3d differential(const Vector3d& x, double scale = 1.0) { return -scale * x; }
  static Matrix3d hessian(double scale = 1.0) { return -scale * Matrix3d::Identity(); }

  double scale() const { return scale_; }
  const GridPtr& grid() const { return grid_; }
  double operator()(Index node) const { return rho_[node]; }
  Vector3d d(Index node) const { return drho_.vec(node); }
  Matrix3d hess(Index) const { return hessian(scale_); }

  const ScalarField& rho() const { return rho_; }
  const CovectorField& drho() const { return drho_; }
  const SymTensor2Field& hess_field() const { return hess_; }

 private:
  GridPtr grid_;
  double scale_ = 1.0;
  ScalarField rho_;
  CovectorField drho_;
  SymTensor2Field hess_;
};

DefiningFunction defining_function(const GridPtr& grid, double scale = 1.0);

/// Riemannian metric. Components are always the compactified ones ḡ; a physical tag
/// means the metric is g = ρ⁻² ḡ with the canonical ρ. Caches ḡ⁻¹ and the
/// connection difference Γ[ḡ] - Γ[δ] (component (k, i, j) = Γ^k_ij).
class Metric {
 public:
  Metric() = default;
  Metric(SymTensor2Field bar, Frame frame);

  Frame frame() const { return frame_; }
  bool physical() const { return frame_ == Frame::physical; }
  const GridPtr& grid() const { return bar_.grid(); }
  const SymTensor2Field& bar() const { return bar_; }
  const SymTensor2Field& inverse_bar() const { return inv_; }
  const Rank3Field& connection_bar() const { return gamma_; }

  Metric as_physical() const;
  Metric as_compactified() const;

  /// Components in this metric's frame at a node.
  Matrix3d components(Index node) const;
  Matrix3d inverse(Index node) const;
  /// Christoffel symbols Γ^k_ij in this metric's frame, indexed [k](i, j).
  std::array<Matrix3d, 3> christoffel(Index node) const;
  std::array<Matrix3d, 3> christoffel_bar(Index node) const;
  double volume_factor(Index node) const;

 private:
  void require_interior(Index node) const;

  Frame frame_ = Frame::compactified;
  SymTensor2Field bar_;
  SymTensor2Field inv_;
  Rank3Field gamma_;
};

/// Christoffel symbols of ḡ from its components and first derivatives.
Rank3Field christoffel_from(const SymTensor2Field& g, const SymTensor2Field& ginv);

/// (h̄, h): the Euclidean background and the Poincaré-ball metric h = ρ⁻² h̄.
std::pair<Metric, Metric> background_structures(const GridPtr& grid);

/// max over interior nodes of ρ^{-δ} ρ^{r} |f|_h̄ where r is the field weight.
template <int R>
double weighted_sup_norm(const Field<R>& f, double delta);

/// h-orthonormal components ρ^r f (interior nodes only) and back.
template <int R>
Field<R> to_physical(const Field<R>& f);
template <int R>
Field<R> to_compactified(const Field<R>& f);

/// Sup of the Euclidean component norm over the given nodes.
template <int R>
double sup_norm(const Field<R>& f, bool interior_only = true);

}  // namespace hyp

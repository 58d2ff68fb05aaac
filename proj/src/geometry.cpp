#include "hyperboloidal/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>

#include "hyperboloidal/stencil.hpp"

namespace hyp {

DefiningFunction::DefiningFunction(GridPtr grid, double scale)
    : grid_(std::move(grid)), scale_(scale), rho_(grid_), drho_(make_covector(grid_)), hess_(grid_) {
  for (Index i = 0; i < grid_->size(); ++i) {
    const Vector3d& x = grid_->x(i);
    rho_[i] = value(x, scale);
    drho_.node(i) = differential(x, scale);
    hess_.set_mat(i, hessian(scale));
  }
}

DefiningFunction defining_function(const GridPtr& grid, double scale) { return DefiningFunction(grid, scale); }

Rank3Field christoffel_from(const SymTensor2Field& g, const SymTensor2Field& ginv) {
  const Rank3Field dg = d1(g);
  Rank3Field out(g.grid(), Frame::compactified, 1);
  for (Index n = 0; n < g.size(); ++n) {
    const auto d = dg.node(n);
    auto dgc = [&](int m, int i, int j) { return d(m * 9 + i * 3 + j); };
    const Matrix3d inv = ginv.mat(n);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = 0.0;
          for (int l = 0; l < 3; ++l) s += inv(k, l) * (dgc(i, l, j) + dgc(j, l, i) - dgc(l, i, j));
          out.node(n)(k * 9 + i * 3 + j) = 0.5 * s;
        }
  }
  return out;
}

Metric::Metric(SymTensor2Field bar, Frame frame) : frame_(frame), bar_(std::move(bar)), inv_(bar_.grid()) {
  if (bar_.frame() != Frame::compactified) throw FrameError("metric components must be coordinate components");
  for (Index n = 0; n < bar_.size(); ++n) {
    Matrix3d m = bar_.mat(n);
    m = 0.5 * (m + m.transpose());
    bar_.set_mat(n, m);
    Eigen::LLT<Matrix3d> llt(m);
    if (llt.info() != Eigen::Success) throw DomainError("metric is not positive definite at node " + std::to_string(n));
    inv_.set_mat(n, llt.solve(Matrix3d::Identity()));
  }
  inv_.set_weight(-2);
  bar_.set_weight(2);
  gamma_ = christoffel_from(bar_, inv_);
}

Metric Metric::as_physical() const {
  Metric m = *this;
  m.frame_ = Frame::physical;
  return m;
}

Metric Metric::as_compactified() const {
  Metric m = *this;
  m.frame_ = Frame::compactified;
  return m;
}

void Metric::require_interior(Index node) const {
  if (physical() && grid()->kind(node) != NodeKind::interior)
    throw FrameError("physical-frame metric evaluated at a boundary node");
}

Matrix3d Metric::components(Index node) const {
  require_interior(node);
  if (!physical()) return bar_.mat(node);
  const double rho = DefiningFunction::value(grid()->x(node));
  return bar_.mat(node) / (rho * rho);
}

Matrix3d Metric::inverse(Index node) const {
  require_interior(node);
  if (!physical()) return inv_.mat(node);
  const double rho = DefiningFunction::value(grid()->x(node));
  return rho * rho * inv_.mat(node);
}

std::array<Matrix3d, 3> Metric::christoffel_bar(Index node) const {
  std::array<Matrix3d, 3> out;
  const auto c = gamma_.node(node);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[k](i, j) = c(k * 9 + i * 3 + j);
  return out;
}

std::array<Matrix3d, 3> Metric::christoffel(Index node) const {
  auto out = christoffel_bar(node);
  if (!physical()) return out;
  require_interior(node);
  const Vector3d& x = grid()->x(node);
  const double rho = DefiningFunction::value(x);
  const Vector3d dr = DefiningFunction::differential(x);
  const Vector3d up = inv_.mat(node) * dr;
  const Matrix3d g = bar_.mat(node);
  // Γ[ρ⁻²ḡ]^k_ij = Γ̄^k_ij - ρ⁻¹(δ^k_i ρ_j + δ^k_j ρ_i - ḡ_ij ρ^k)
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double c = (k == i ? dr[j] : 0.0) + (k == j ? dr[i] : 0.0) - g(i, j) * up[k];
        out[k](i, j) -= c / rho;
      }
  return out;
}

double Metric::volume_factor(Index node) const { return std::sqrt(components(node).determinant()); }

std::pair<Metric, Metric> background_structures(const GridPtr& grid) {
  SymTensor2Field delta(grid);
  for (Index n = 0; n < grid->size(); ++n) delta.set_mat(n, Matrix3d::Identity());
  Metric hbar(delta, Frame::compactified);
  return {hbar, hbar.as_physical()};
}

template <int R>
double weighted_sup_norm(const Field<R>& f, double delta) {
  if (f.frame() != Frame::compactified) throw FrameError("weighted_sup_norm expects compactified components");
  const Grid& g = *f.grid();
  double out = 0.0;
  for (Index n : g.interior_nodes()) {
    const double rho = DefiningFunction::value(g.x(n));
    out = std::max(out, std::pow(rho, f.weight() - delta) * f.node(n).norm());
  }
  return out;
}

template <int R>
Field<R> to_physical(const Field<R>& f) {
  if (f.frame() != Frame::compactified) throw FrameError("field already in physical frame");
  Field<R> out = f;
  out.data().setZero();
  out.set_frame(Frame::physical).set_support(Support::interior);
  for (Index n : f.grid()->interior_nodes())
    out.node(n) = std::pow(DefiningFunction::value(f.grid()->x(n)), f.weight()) * f.node(n);
  return out;
}

template <int R>
Field<R> to_compactified(const Field<R>& f) {
  if (f.frame() != Frame::physical) throw FrameError("field already in compactified frame");
  Field<R> out = f;
  out.data().setZero();
  out.set_frame(Frame::compactified).set_support(Support::interior);
  for (Index n : f.grid()->interior_nodes())
    out.node(n) = std::pow(DefiningFunction::value(f.grid()->x(n)), -f.weight()) * f.node(n);
  return out;
}

template <int R>
double sup_norm(const Field<R>& f, bool interior_only) {
  const Grid& g = *f.grid();
  double out = 0.0;
  if (interior_only) {
    for (Index n : g.interior_nodes()) out = std::max(out, f.node(n).norm());
  } else {
    for (Index n = 0; n < g.size(); ++n)
      if (g.kind(n) != NodeKind::exterior) out = std::max(out, f.node(n).norm());
  }
  return out;
}

#define HYP_INSTANTIATE(R)                                       \
  template double weighted_sup_norm<R>(const Field<R>&, double); \
  template Field<R> to_physical<R>(const Field<R>&);             \
  template Field<R> to_compactified<R>(const Field<R>&);         \
  template double sup_norm<R>(const Field<R>&, bool);
HYP_INSTANTIATE(0)
HYP_INSTANTIATE(1)
HYP_INSTANTIATE(2)
HYP_INSTANTIATE(3)
HYP_INSTANTIATE(4)
#undef HYP_INSTANTIATE

}  // namespace hyp

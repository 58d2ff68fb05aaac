#include "hyperboloidal/defining_tensor.hpp"

#include <cmath>

#include "hyperboloidal/parallel.hpp"

namespace hyp {

Matrix3d BoundaryTrace::mat(std::size_t k) const {
  return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(values.col(static_cast<Index>(k)).data());
}

double BoundaryTrace::sup_distance(const BoundaryTrace& other) const {
  if (nodes != other.nodes || values.rows() != other.values.rows()) throw FrameError("boundary traces do not match");
  double out = 0.0;
  for (Index k = 0; k < values.cols(); ++k) out = std::max(out, (values.col(k) - other.values.col(k)).norm());
  return out;
}

namespace {

struct RhoJet {
  Vector3d d, grad, dm;
  Matrix3d hess;
  double m, lap, a;
};

RhoJet rho_jet(const Metric& gbar, const DefiningFunction& rho, Index n) {
  RhoJet j;
  const Vector3d& x = gbar.grid()->x(n);
  const Matrix3d inv = gbar.inverse_bar().mat(n);
  const auto gam = gbar.christoffel_bar(n);
  j.d = DefiningFunction::differential(x, rho.scale());
  j.hess = DefiningFunction::hessian(rho.scale());
  for (int k = 0; k < 3; ++k) j.hess -= gam[k] * j.d[k];
  j.grad = inv * j.d;
  j.m = j.d.dot(j.grad);
  j.lap = inv.cwiseProduct(j.hess).sum();
  j.dm = 2.0 * j.hess * j.grad;
  j.a = 0.5 * j.m * j.lap + 0.25 * j.dm.dot(j.grad);
  return j;
}

void require_compactified(const Metric& gbar) {
  if (gbar.physical()) throw FrameError("expects the compactified metric ḡ");
}

}  // namespace

ScalarField A_scalar(const Metric& gbar, const DefiningFunction& rho) {
  require_compactified(gbar);
  ScalarField out(gbar.grid());
  for (Index n = 0; n < out.size(); ++n) out[n] = rho_jet(gbar, rho, n).a;
  return out;
}

SymTensor2Field H_tensor(const Metric& gbar, const DefiningFunction& rho) {
  require_compactified(gbar);
  SymTensor2Field out(gbar.grid());
  parallel_for(out.size(), [&](Index n) {
    const RhoJet j = rho_jet(gbar, rho, n);
    const Matrix3d g = gbar.bar().mat(n);
    const double dm_dr = j.dm.dot(j.grad);
    Matrix3d h = j.m * j.m * (j.hess - j.lap / 3.0 * g);
    h -= 0.5 * j.m * (j.dm * j.d.transpose() + j.d * j.dm.transpose());
    h += j.m * dm_dr / 3.0 * g;
    h += j.a * (j.d * j.d.transpose() - j.m / 3.0 * g);
    out.set_mat(n, 0.5 * (h + h.transpose()));
  });
  return out;
}

namespace {

// ḡ-orthonormal frame (e_1, e_2) of the plane ḡ-orthogonal to grad ρ.
std::array<Vector3d, 2> tangential_frame(const Matrix3d& g, const Vector3d& normal) {
  const Vector3d nrm = normal / std::sqrt(normal.dot(g * normal));
  std::array<int, 3> axes{0, 1, 2};
  std::sort(axes.begin(), axes.end(), [&](int a, int b) { return std::abs(nrm[a]) < std::abs(nrm[b]); });
  std::array<Vector3d, 2> e;
  for (int k = 0; k < 2; ++k) {
    Vector3d v = Vector3d::Unit(axes[k]);
    v -= v.dot(g * nrm) * nrm;
    for (int l = 0; l < k; ++l) v -= v.dot(g * e[l]) * e[l];
    e[k] = v / std::sqrt(v.dot(g * v));
  }
  return e;
}

}  // namespace

BoundaryTrace shear_tensor(const Metric& gbar) {
  require_compactified(gbar);
  const Grid& grid = *gbar.grid();
  const DefiningFunction rho(gbar.grid());
  BoundaryTrace out;
  out.grid = gbar.grid();
  out.rank = 2;
  out.nodes = grid.boundary_nodes();
  out.values = Eigen::MatrixXd::Zero(9, static_cast<Index>(out.nodes.size()));
  for (std::size_t k = 0; k < out.nodes.size(); ++k) {
    const Index n = out.nodes[k];
    const RhoJet j = rho_jet(gbar, rho, n);
    if (j.m < 1e-24) throw DomainError("degenerate boundary metric: dρ vanishes");
    const Matrix3d g = gbar.bar().mat(n);
    const auto e = tangential_frame(g, j.grad);
    Eigen::Matrix2d chi;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) chi(a, b) = -e[a].dot(j.hess * e[b]) / std::sqrt(j.m);
    chi -= 0.5 * chi.trace() * Eigen::Matrix2d::Identity();
    Matrix3d cov = Matrix3d::Zero();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) cov += chi(a, b) * (g * e[a]) * (g * e[b]).transpose();
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(out.values.col(static_cast<Index>(k)).data()) = cov;
  }
  return out;
}

template <int R>
BoundaryTrace boundary_restrict(const Field<R>& f, int order) {
  if (order != 1 && order != 2) throw DomainError("extrapolation order must be 1 or 2");
  const Grid& grid = *f.grid();
  BoundaryTrace out;
  out.grid = f.grid();
  out.rank = R;
  out.order = order;
  out.nodes = grid.boundary_nodes();
  out.values = Eigen::MatrixXd::Zero(Field<R>::kComponents, static_cast<Index>(out.nodes.size()));
  const double scale = std::max(sup_norm(f), 1e-300);
  for (std::size_t k = 0; k < out.nodes.size(); ++k) {
    const Index n = out.nodes[k];
    int axis = 0;
    if (grid.mode() == GridMode::ball3d) {
      const Vector3d& x = grid.x(n);
      x.cwiseAbs().maxCoeff(&axis);
    }
    const int step = grid.mode() == GridMode::ball3d && grid.x(n)[axis] < 0 ? 1 : -1;
    std::vector<Index> layer;
    int first = 0;
    for (int off = 1; off <= 4 && first == 0; ++off) {
      const Index m = grid.neighbor(n, axis, step * off);
      if (m >= 0 && grid.interior(m)) first = off;
    }
    if (first == 0) throw DomainError("no interior layer next to a boundary node");
    for (int l = 0; l < 3; ++l) {
      const Index m = grid.neighbor(n, axis, step * (first + l));
      if (m < 0 || !grid.interior(m)) throw DomainError("too few interior layers for extrapolation");
      layer.push_back(m);
    }
    const double a0 = f.node(layer[0]).norm(), a1 = f.node(layer[1]).norm(), a2 = f.node(layer[2]).norm();
    if (a0 > 1e-8 * std::max(scale, 1.0) && a0 > 0.1 * scale && a0 > 1.6 * a1 && a1 > 1.6 * a2)
      throw DomainError("field components diverge towards the boundary");
    // Lagrange extrapolation from positions first, first+1, (first+2) to 0.
    const double p0 = first, p1 = first + 1.0, p2 = first + 2.0;
    Eigen::VectorXd v;
    if (order == 1) {
      v = (p1 * f.node(layer[0]) - p0 * f.node(layer[1])) / (p1 - p0);
    } else {
      const double w0 = p1 * p2 / ((p0 - p1) * (p0 - p2));
      const double w1 = p0 * p2 / ((p1 - p0) * (p1 - p2));
      const double w2 = p0 * p1 / ((p2 - p0) * (p2 - p1));
      v = w0 * f.node(layer[0]) + w1 * f.node(layer[1]) + w2 * f.node(layer[2]);
    }
    out.values.col(static_cast<Index>(k)) = v;
  }
  return out;
}

template BoundaryTrace boundary_restrict<0>(const Field<0>&, int);
template BoundaryTrace boundary_restrict<1>(const Field<1>&, int);
template BoundaryTrace boundary_restrict<2>(const Field<2>&, int);

double tangential_shear_mismatch(const Metric& gbar, const BoundaryTrace& sigma_bar, const BoundaryTrace& chi) {
  if (sigma_bar.nodes != chi.nodes) throw FrameError("boundary traces do not match");
  const DefiningFunction rho(gbar.grid());
  double out = 0.0;
  for (std::size_t k = 0; k < chi.nodes.size(); ++k) {
    const Index n = chi.nodes[k];
    const RhoJet j = rho_jet(gbar, rho, n);
    const auto e = tangential_frame(gbar.bar().mat(n), j.grad);
    const Matrix3d s = sigma_bar.mat(k) + chi.mat(k);
    Eigen::Matrix2d p;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) p(a, b) = e[a].dot(s * e[b]);
    out = std::max(out, p.norm());
  }
  return out;
}

}  // namespace hyp

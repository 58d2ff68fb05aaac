#include <gtest/gtest.h>

#include <Eigen/LU>

#include "hyperboloidal/defining_tensor.hpp"
#include "hyperboloidal/errors.hpp"
#include "hyperboloidal/presets.hpp"
#include "hyperboloidal/tensor_ops.hpp"
#include "support.hpp"

using namespace hyp;
using test::rho_of;

namespace {

Metric flat(const GridPtr& g) { return background_structures(g).first; }

Metric anisotropic(const GridPtr& g) {
  PresetParams p;
  p.metric = "perturbed";
  p.metric_epsilon = 0.3;
  p.metric_anisotropy = 0.5;
  return preset_metric(g, p).as_compactified();
}

Index nearest(const Grid& g, const Vector3d& x) {
  Index best = 0;
  for (Index n = 1; n < g.size(); ++n)
    if ((g.x(n) - x).norm() < (g.x(best) - x).norm()) best = n;
  return best;
}

ScalarField theta_field(const GridPtr& g) {
  return sample_scalar(g, [](const Vector3d& x) { return 1.0 + 0.25 * std::pow(rho_of(x), 2); });
}

const Vector3d kCenter(0.35, -0.2, 0.25);

}  // namespace

TEST(AScalar, FlatOracle) {
  for (GridPtr g : {make_grid(GridMode::radial1d, 65), make_grid(GridMode::ball3d, 17)}) {
    const ScalarField a = A_scalar(flat(g), DefiningFunction(g));
    for (Index n = 0; n < g->size(); ++n)
      if (g->kind(n) != NodeKind::exterior) EXPECT_NEAR(a[n], -2.0 * g->x(n).squaredNorm(), 1e-12);
  }
  const GridPtr g = make_grid(GridMode::radial1d, 33);
  EXPECT_EQ(A_scalar(flat(g), DefiningFunction(g))[0], 0.0);
}

TEST(AScalar, ConformalCovarianceConverges) {
  std::vector<double> hs, es;
  for (int n : {256, 512, 1024}) {
    const GridPtr g = Grid::patch(n, kCenter, 3);
    const Metric lam = anisotropic(g);
    const ScalarField th = theta_field(g);
    const DefiningFunction rho(g);
    const Index c = nearest(*g, kCenter);
    const double a1 = A_scalar(conformal_rescale(lam, th, 4.0), rho)[c];
    const double a0 = A_scalar(lam, rho)[c];
    hs.push_back(g->h());
    es.push_back(std::abs(a1 - std::pow(th[c], -8) * a0));
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(HTensor, FlatCancellation) {
  for (GridPtr g : {make_grid(GridMode::radial1d, 257), make_grid(GridMode::ball3d, 17)}) {
    const SymTensor2Field h = H_tensor(flat(g), DefiningFunction(g));
    EXPECT_LE(sup_norm(h, false), 1e-11);
  }
}

TEST(HTensor, ScalesWithFifthPower) {
  const GridPtr g = Grid::patch(257, kCenter, 3);
  const Metric lam = anisotropic(g);
  const SymTensor2Field h1 = H_tensor(lam, DefiningFunction(g));
  const double scale = sup_norm(h1, false);
  ASSERT_GT(scale, 1e-6);
  for (double c : {2.0, 0.5, 10.0}) {
    SymTensor2Field hc = H_tensor(lam, DefiningFunction(g, c));
    hc *= std::pow(c, -5.0);
    double e = 0.0;
    for (Index n = 0; n < g->size(); ++n) e = std::max(e, (hc.mat(n) - h1.mat(n)).norm());
    EXPECT_LE(e / scale, 1e-12) << "c = " << c;
  }
}

TEST(HTensor, TraceFreeAndTransverse) {
  const GridPtr g = Grid::patch(257, kCenter, 3);
  const Metric lam = anisotropic(g);
  const DefiningFunction rho(g);
  const SymTensor2Field h = H_tensor(lam, rho);
  const double scale = sup_norm(h, false);
  for (Index n = 0; n < g->size(); ++n) {
    const Matrix3d m = h.mat(n);
    EXPECT_LE(std::abs(lam.inverse_bar().mat(n).cwiseProduct(m).sum()), 1e-11 * scale);
    const Vector3d grad = lam.inverse_bar().mat(n) * rho.d(n);
    EXPECT_LE((m * grad).norm(), 1e-11 * scale * grad.norm());
  }
}

TEST(HTensor, ConformalCovarianceConverges) {
  std::vector<double> hs, es;
  for (int n : {256, 512, 1024}) {
    const GridPtr g = Grid::patch(n, kCenter, 3);
    const Metric lam = anisotropic(g);
    const ScalarField th = theta_field(g);
    const DefiningFunction rho(g);
    const Index c = nearest(*g, kCenter);
    const Matrix3d h1 = H_tensor(conformal_rescale(lam, th, 4.0), rho).mat(c);
    const Matrix3d h0 = H_tensor(lam, rho).mat(c);
    hs.push_back(g->h());
    es.push_back((h1 - std::pow(th[c], -8) * h0).norm());
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(ShearTensor, RoundSphereIsUmbilic) {
  for (GridPtr g : {make_grid(GridMode::radial1d, 65), make_grid(GridMode::ball3d, 17)}) {
    EXPECT_LE(shear_tensor(flat(g)).values.cwiseAbs().maxCoeff(), 1e-12);
    const Metric scaled = conformal_rescale(flat(g), sample_scalar(g, [](const Vector3d& x) {
                                              return 1.0 + 0.3 * std::cos(x.squaredNorm());
                                            }), 4.0);
    EXPECT_LE(shear_tensor(scaled).values.cwiseAbs().maxCoeff(), 1e-10);
  }
}

// ḡ = δ + ε b(r) v⊗v near ∂M. Oracle: χ̂ from the closed-form metric, with metric derivatives
// taken by fourth-order differences of the closed form at step 1e-4.
TEST(ShearTensor, NonSymmetricPerturbationAgainstClosedForm) {
  auto metric = [](double eps) {
    return [eps](const Vector3d& x) {
      const double r = x.norm();
      const double b = r > 0.6 ? std::pow(r - 0.6, 4) : 0.0;
      const Vector3d v(1.0 + x[1], x[2], 0.0);
      return Matrix3d(Matrix3d::Identity() + eps * b * v * v.transpose());
    };
  };
  auto oracle = [](const auto& gfun, const Vector3d& x) {
    const double s = 1e-4;
    std::array<Matrix3d, 3> dg;
    for (int k = 0; k < 3; ++k) {
      const Vector3d e = Vector3d::Unit(k) * s;
      dg[k] = (-gfun(x + 2 * e) + 8 * gfun(x + e) - 8 * gfun(x - e) + gfun(x - 2 * e)) / (12 * s);
    }
    const Matrix3d g = gfun(x), gi = g.inverse();
    const Vector3d d = -x;
    Matrix3d hess = -Matrix3d::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l)
            hess(i, j) -= 0.5 * gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j)) * d[k];
    const double m = d.dot(gi * d);
    const Vector3d nflat = d / std::sqrt(m), nup = gi * nflat;
    const Matrix3d p = Matrix3d::Identity() - nup * nflat.transpose();
    const Matrix3d chi = -p.transpose() * hess * p / std::sqrt(m);
    const Matrix3d gt = g - nflat * nflat.transpose();
    return Matrix3d(chi - 0.5 * gi.cwiseProduct(chi).sum() * gt);
  };
  std::vector<double> hs, es;
  double size = 0.0;
  for (int n : {17, 33, 65}) {
    const GridPtr g = make_grid(GridMode::ball3d, n);
    const auto gfun = metric(0.5);
    const Metric lam(sample_tensor(g, gfun), Frame::compactified);
    const BoundaryTrace chi = shear_tensor(lam);
    double e = 0.0;
    size = 0.0;
    for (std::size_t k = 0; k < chi.nodes.size(); ++k) {
      const Matrix3d ref = oracle(gfun, g->x(chi.nodes[k]));
      e = std::max(e, (chi.mat(k) - ref).norm());
      size = std::max(size, ref.norm());
    }
    hs.push_back(g->h());
    es.push_back(e);
  }
  EXPECT_GT(size, 1e-3);
  EXPECT_GE(test::slope(hs, es), 1.8);
  EXPECT_LE(es.back(), 0.05 * size);

  const GridPtr g = make_grid(GridMode::ball3d, 33);
  const double c1 = shear_tensor(Metric(sample_tensor(g, metric(1e-3)), Frame::compactified)).values.cwiseAbs().maxCoeff();
  const double c2 = shear_tensor(Metric(sample_tensor(g, metric(2e-3)), Frame::compactified)).values.cwiseAbs().maxCoeff();
  EXPECT_NEAR(c2 / c1, 2.0, 1e-2);
}

TEST(BoundaryRestrict, PolynomialExamples) {
  for (GridPtr g : {make_grid(GridMode::radial1d, 65), make_grid(GridMode::ball3d, 17)}) {
    ScalarField c(g);
    c.data().setConstant(2.5);
    c.set_support(Support::interior);
    const BoundaryTrace t = boundary_restrict(c);
    EXPECT_LE((t.values.array() - 2.5).abs().maxCoeff(), 1e-13);
    ScalarField rho = DefiningFunction(g).rho();
    rho.set_support(Support::interior);
    for (Index n : g->boundary_nodes()) rho[n] = 1.0;  // ignored: only interior values are used
    const BoundaryTrace r = boundary_restrict(rho);
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
      EXPECT_NEAR(r.values(0, static_cast<Index>(k)), rho_of(g->x(r.nodes[k])), 1e-13);
  }
}

TEST(BoundaryRestrict, SmoothFieldConverges) {
  auto f = [](const Vector3d& x) { return 3.0 + std::sin(2.0 * x[0]) + x[1] * x[1] * x[2] + 0.5 * std::exp(x[2]); };
  std::vector<double> hs, es;
  for (int n : {17, 33, 65}) {
    const GridPtr g = make_grid(GridMode::ball3d, n);
    ScalarField s = sample_scalar(g, f);
    s.set_support(Support::interior);
    const BoundaryTrace t = boundary_restrict(s);
    double e = 0.0;
    for (std::size_t k = 0; k < t.nodes.size(); ++k)
      e = std::max(e, std::abs(t.values(0, static_cast<Index>(k)) - f(g->x(t.nodes[k]))));
    hs.push_back(g->h());
    es.push_back(e);
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(BoundaryRestrict, DivergingFieldIsRejected) {
  const GridPtr g = make_grid(GridMode::radial1d, 129);
  ScalarField f = sample_scalar(g, [](const Vector3d& x) { return rho_of(x) > 0 ? std::pow(rho_of(x), -2) : 0.0; });
  f.set_support(Support::interior);
  EXPECT_THROW(boundary_restrict(f), DomainError);
  EXPECT_THROW(boundary_restrict(f, 3), DomainError);
}

#include <gtest/gtest.h>

#include <random>

#include "hyperboloidal/elliptic.hpp"
#include "hyperboloidal/errors.hpp"
#include "hyperboloidal/presets.hpp"
#include "hyperboloidal/tensor_ops.hpp"
#include "support.hpp"

using namespace hyp;
using test::interior_sup;
using test::interior_sup_diff;
using test::rho_of;

namespace {

Metric flat(const GridPtr& g) { return background_structures(g).first; }
Metric poincare(const GridPtr& g) { return background_structures(g).second; }

Metric perturbed(const GridPtr& g, double eps = 0.3, double aniso = 0.0) {
  PresetParams p;
  p.metric = "perturbed";
  p.metric_epsilon = eps;
  p.metric_anisotropy = aniso;
  return preset_metric(g, p);
}

Matrix3d random_matrix(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST(Laplacian, FlatLaplacianOfRadiusSquared) {
  for (GridPtr g : {make_grid(GridMode::ball3d, 17), make_grid(GridMode::radial1d, 33)}) {
    const ScalarField f = sample_scalar(g, [](const Vector3d& x) { return x.squaredNorm(); });
    const ScalarField lap = laplacian(flat(g), f);
    for (Index n : g->interior_nodes()) EXPECT_NEAR(lap[n], 6.0, 1e-11);
  }
}

TEST(Hessian, RhoHasHessianMinusDelta) {
  for (GridPtr g : {make_grid(GridMode::ball3d, 17), make_grid(GridMode::radial1d, 33)}) {
    const SymTensor2Field hs = hessian(flat(g), DefiningFunction(g).rho());
    for (Index n : g->interior_nodes()) EXPECT_LE((hs.mat(n) + Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(Laplacian, IsTraceOfHessian) {
  const GridPtr g = make_grid(GridMode::ball3d, 17);
  const Metric lam = perturbed(g, 0.3, 0.5).as_compactified();
  const ScalarField f = sample_scalar(g, [](const Vector3d& x) { return std::sin(x[0] + 2 * x[1]) * std::cos(x[2]); });
  const ScalarField lap = laplacian(lam, f);
  const SymTensor2Field hs = hessian(lam, f);
  for (Index n : g->interior_nodes())
    EXPECT_NEAR(lap[n], lam.inverse_bar().mat(n).cwiseProduct(hs.mat(n)).sum(), 1e-12 * (1 + std::abs(lap[n])));
}

// Δ_h f = ρ²Δf - ρ⟨dρ, df⟩ with f = exp(-r²): Δf = (4r² - 6)f, ⟨dρ, df⟩ = 2r²f.
TEST(Laplacian, HyperbolicRateAgainstClosedForm) {
  std::vector<double> hs, es;
  for (int n : {256, 512, 1024}) {
    const GridPtr g = make_grid(GridMode::radial1d, n);
    const ScalarField f = sample_scalar(g, [](const Vector3d& x) { return std::exp(-x.squaredNorm()); });
    const ScalarField lap = laplacian(poincare(g), f);
    double e = 0.0;
    for (Index k : g->interior_nodes()) {
      const double r2 = g->x(k).squaredNorm(), rho = rho_of(g->x(k)), fv = std::exp(-r2);
      e = std::max(e, std::abs(lap[k] - (rho * rho * (4 * r2 - 6) * fv - rho * 2 * r2 * fv)));
    }
    hs.push_back(g->h());
    es.push_back(e);
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(Divergence, FlatExamples) {
  const GridPtr g = make_grid(GridMode::ball3d, 17);
  const VectorField x = sample_vector(g, [](const Vector3d& p) { return p; });
  const ScalarField d = divergence(flat(g), x);
  for (Index n : g->interior_nodes()) EXPECT_NEAR(d[n], 3.0, 1e-12);
  EXPECT_EQ(interior_sup(divergence(flat(g), VectorField(g))), 0.0);
  EXPECT_EQ(interior_sup(divergence(perturbed(g).as_compactified(), SymTensor2Field(g))), 0.0);
}

// Div_{φ⁴λ}(φ⁻²T) = φ⁻⁶ Div_λ T for λ-trace-free T.
TEST(Divergence, ConformalIdentityConverges) {
  std::vector<double> hs, es;
  for (int n : {128, 256, 512}) {
    const GridPtr g = make_grid(GridMode::radial1d, n);
    const Metric lam = perturbed(g);
    const ScalarField phi = sample_scalar(g, [](const Vector3d& x) { return 1.0 + 0.3 * rho_of(x); });
    const SymTensor2Field t = trace_free_part(lam, sample_tensor(g, [](const Vector3d& x) {
                                                return Matrix3d(rho_of(x) * (x * x.transpose()) + 0.1 * x[0] * x[0] * Matrix3d::Identity());
                                              }));
    ScalarField pm2 = phi, pm6 = phi;
    for (Index k = 0; k < g->size(); ++k) pm2[k] = std::pow(phi[k], -2), pm6[k] = std::pow(phi[k], -6);
    const CovectorField lhs = divergence(conformal_rescale(lam, phi, 4.0), pm2 * t);
    const CovectorField rhs = pm6 * divergence(lam, t);
    hs.push_back(g->h());
    es.push_back(interior_sup_diff(lhs, rhs) / interior_sup(rhs));
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
}

TEST(Curvature, FlatIsZero) {
  const GridPtr g = make_grid(GridMode::ball3d, 17);
  EXPECT_LE(interior_sup(scalar_curvature(flat(g))), 1e-12);
}

TEST(Curvature, PoincareBallIsMinusSix) {
  const GridPtr g = make_grid(GridMode::radial1d, 1024);
  const ScalarField r = scalar_curvature(poincare(g));
  for (Index n : g->interior_nodes()) EXPECT_NEAR(r[n], -6.0, 1e-6);
}

TEST(Curvature, UnitConformalFactorIsExact) {
  const GridPtr g = make_grid(GridMode::radial1d, 129);
  const Metric lam = perturbed(g);
  ScalarField one(g);
  one.data().setOnes();
  const ScalarField a = scalar_curvature(lam), b = scalar_curvature(conformal_rescale(lam, one, 4.0));
  EXPECT_EQ(interior_sup_diff(a, b), 0.0);
}

TEST(ConformalKilling, FlatKernel) {
  const GridPtr g = make_grid(GridMode::ball3d, 17);
  const VectorField dil = sample_vector(g, [](const Vector3d& x) { return x; });
  const VectorField tr = sample_vector(g, [](const Vector3d&) { return Vector3d(0.3, -1.0, 2.0); });
  EXPECT_LE(interior_sup(conformal_killing(flat(g), dil)), 1e-12);
  EXPECT_LE(interior_sup(conformal_killing(flat(g), tr)), 1e-12);
}

TEST(ConformalKilling, TraceFree) {
  const GridPtr g = make_grid(GridMode::ball3d, 13);
  const Metric lam = perturbed(g, 0.4, 0.7);
  std::mt19937 rng(7);
  const Matrix3d m = random_matrix(rng);
  const Vector3d a = random_matrix(rng).col(0);
  const VectorField x = sample_vector(g, [&](const Vector3d& p) {
    return Vector3d(m * p + a * std::sin(p.squaredNorm()) + rho_of(p) * p.cwiseProduct(p));
  });
  const SymTensor2Field d = conformal_killing(lam, x);
  const ScalarField tr = trace(lam, d);
  for (Index n : g->interior_nodes()) EXPECT_LE(std::abs(tr[n]), 1e-12 * (1.0 + lam.components(n).norm() * d.mat(n).norm()));
}

TEST(VectorLaplacian, ZeroAndFlatKernel) {
  const GridPtr g = make_grid(GridMode::ball3d, 17);
  EXPECT_EQ(interior_sup(vector_laplacian_apply(flat(g), VectorField(g))), 0.0);
  const VectorField dil = sample_vector(g, [](const Vector3d& x) { return x; });
  const VectorField rot = sample_vector(g, [](const Vector3d& x) { return Vector3d(-x[1], x[0], 0.0); });
  EXPECT_LE(interior_sup(vector_laplacian_apply(flat(g), dil)), 1e-11);
  EXPECT_LE(interior_sup(vector_laplacian_apply(flat(g), rot)), 1e-11);
}

// ⟨LW, V⟩ = ⟨W, LV⟩ in the discrete mass-weighted product for compactly supported fields.
TEST(VectorLaplacian, RadialSelfAdjoint) {
  const GridPtr g = make_grid(GridMode::radial1d, 512);
  const Metric lam = perturbed(g);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto bumps = [&]() {
    std::array<double, 4> c{u(rng), u(rng), u(rng), u(rng)};
    return sample_vector(g, [c](const Vector3d& x) {
      const double r = x[0];
      if (r <= 0.1 || r >= 0.9) return Vector3d(0, 0, 0);
      const double b = std::pow(std::sin(M_PI * (r - 0.1) / 0.8), 4);
      return Vector3d(b * (c[0] + c[1] * r + c[2] * r * r + c[3] * std::cos(7 * r)), 0, 0);
    });
  };
  const VectorField w = bumps(), v = bumps();
  const Eigen::VectorXd mass = radial_vector_mass(lam);
  const VectorField lw = vector_laplacian_apply(lam, w), lv = vector_laplacian_apply(lam, v);
  double a = 0.0, b = 0.0, scale = 0.0;
  for (Index n : g->interior_nodes()) {
    a += mass[n] * lw.node(n)[0] * v.node(n)[0];
    b += mass[n] * w.node(n)[0] * lv.node(n)[0];
    scale += std::abs(mass[n] * lw.node(n)[0] * v.node(n)[0]);
  }
  EXPECT_LE(std::abs(a - b), 1e-8 * scale);
}

TEST(VectorLaplacian, ReducedFormMatchesDirectApplication) {
  std::vector<double> hs, es;
  for (int n : {128, 256, 512}) {
    const GridPtr g = make_grid(GridMode::radial1d, n);
    const Metric lam = perturbed(g);
    const VectorField u = sample_vector(g, [](const Vector3d& x) { return Vector3d(x[0] * (1.0 + x[0] * x[0]), 0, 0); });
    const VectorField w = sample_vector(g, [](const Vector3d& x) {
      return Vector3d(std::pow(rho_of(x), 3) * x[0] * (1.0 + x[0] * x[0]), 0, 0);
    });
    const VectorField red = reduced_vector_laplacian(lam, u, 3);
    const VectorField dir = vector_laplacian_apply(lam, w);
    double e = 0.0, s = 0.0;
    for (Index k : g->interior_nodes()) {
      if (g->r(k) > 0.8 || k == 0) continue;
      const double r3 = std::pow(rho_of(g->x(k)), 3);
      e = std::max(e, std::abs(red.node(k)[0] - dir.node(k)[0] / r3));
      s = std::max(s, std::abs(red.node(k)[0]));
    }
    hs.push_back(g->h());
    es.push_back(e / s);
  }
  EXPECT_GE(test::slope(hs, es), 1.8);
  const GridPtr g = make_grid(GridMode::radial1d, 17);
  EXPECT_THROW(reduced_vector_laplacian(perturbed(g), VectorField(g), 4), WeightWindowError);
  EXPECT_THROW(reduced_vector_laplacian(perturbed(g).as_compactified(), VectorField(g), 3), FrameError);
}

TEST(Cross, FlatBasis) {
  const GridPtr g = make_grid(GridMode::ball3d, 9);
  const VectorField ex = sample_vector(g, [](const Vector3d&) { return Vector3d(1, 0, 0); });
  const VectorField ey = sample_vector(g, [](const Vector3d&) { return Vector3d(0, 1, 0); });
  const VectorField c = cross(flat(g), ex, ey);
  for (Index n : g->interior_nodes()) EXPECT_LE((c.vec(n) - Vector3d(0, 0, 1)).norm(), 1e-15);
  EXPECT_EQ(interior_sup(cross(perturbed(g, 0.3, 0.5), ex, ex)), 0.0);
}

// (φ⁻⁶X) ×_{φ⁴λ} (φ⁻⁶Y) = φ⁻¹⁰ X ×_λ Y with φ = 1 + ρ.
TEST(Cross, ConformalScaling) {
  const GridPtr g = make_grid(GridMode::ball3d, 9);
  const Metric lam = perturbed(g, 0.3, 0.5);
  const ScalarField phi = sample_scalar(g, [](const Vector3d& x) { return 1.0 + std::max(rho_of(x), 0.0); });
  const VectorField x = sample_vector(g, [](const Vector3d& p) { return Vector3d(1 + p[1], p[2] * p[0], -0.5); });
  const VectorField y = sample_vector(g, [](const Vector3d& p) { return Vector3d(p[2], 2.0, p[0] - p[1]); });
  ScalarField m6 = phi;
  for (Index k = 0; k < g->size(); ++k) m6[k] = std::pow(phi[k], -6);
  const VectorField lhs = cross(conformal_rescale(lam, phi, 4.0), m6 * x, m6 * y);
  const VectorField rhs = cross(lam, x, y);
  for (Index n : g->interior_nodes())
    EXPECT_LE((lhs.vec(n) - std::pow(phi[n], -10) * rhs.vec(n)).norm(), 1e-13 * rhs.vec(n).norm() + 1e-300);
}

TEST(TraceFree, Examples) {
  const GridPtr g = make_grid(GridMode::ball3d, 9);
  const SymTensor2Field delta = sample_tensor(g, [](const Vector3d&) { return Matrix3d::Identity(); });
  EXPECT_EQ(interior_sup(trace_free_part(flat(g), delta)), 0.0);
  const Metric lam = perturbed(g, 0.3, 0.5);
  ScalarField one(g);
  one.data().setOnes();
  EXPECT_EQ((conformal_rescale(lam, one, 4.0).bar().data() - lam.bar().data()).cwiseAbs().maxCoeff(), 0.0);

  std::mt19937 rng(3);
  SymTensor2Field t(g);
  for (Index n = 0; n < g->size(); ++n) {
    const Matrix3d m = random_matrix(rng);
    t.set_mat(n, m + m.transpose());
  }
  const ScalarField tr = trace(lam.as_compactified(), trace_free_part(lam, t));
  for (Index n : g->interior_nodes()) EXPECT_LE(std::abs(tr[n]), 1e-12 * t.mat(n).norm());
}

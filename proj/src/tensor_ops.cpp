#include "hyperboloidal/tensor_ops.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "hyperboloidal/parallel.hpp"
#include "hyperboloidal/stencil.hpp"

namespace hyp {

namespace {

void same_grid(const Metric& g, const GridPtr& f) {
  if (g.grid() != f) throw FrameError("metric and field live on different grids");
}

template <int R>
void coordinate(const Field<R>& f) {
  if (f.frame() != Frame::compactified) throw FrameError("operators act on coordinate components");
}

// Nodes at which an operator in the metric's frame is evaluated.
bool evaluable(const Metric& g, Index n) {
  const NodeKind k = g.grid()->kind(n);
  return g.physical() ? k == NodeKind::interior : k != NodeKind::exterior;
}

template <int R>
Field<R> finish(Field<R> f, const Metric& g) {
  if (g.physical()) f.set_support(Support::interior);
  return f;
}

double rho_at(const Grid& grid, Index n) { return DefiningFunction::value(grid.x(n)); }

}  // namespace

VectorField gradient(const Metric& g, const ScalarField& f, int order) {
  same_grid(g, f.grid());
  coordinate(f);
  const CovectorField df = d1(f, order);
  VectorField out(f.grid());
  const Grid& grid = *f.grid();
  parallel_for(grid.size(), [&](Index n) {
    double s = 1.0;
    if (g.physical()) s = std::pow(rho_at(grid, n), 2);
    out.node(n) = s * (g.inverse_bar().mat(n) * df.vec(n));
  });
  return out;
}

SymTensor2Field hessian(const Metric& g, const ScalarField& f, int order) {
  same_grid(g, f.grid());
  coordinate(f);
  const CovectorField df = d1(f, order);
  const SymTensor2Field ddf = d2(f, order);
  SymTensor2Field out(f.grid());
  parallel_for(out.size(), [&](Index n) {
    if (!evaluable(g, n)) return;
    const auto gam = g.christoffel(n);
    Matrix3d h = ddf.mat(n);
    for (int k = 0; k < 3; ++k) h -= gam[k] * df.vec(n)(k);
    out.set_mat(n, 0.5 * (h + h.transpose()));
  });
  return finish(out, g);
}

ScalarField laplacian(const Metric& g, const ScalarField& f, int order) {
  same_grid(g, f.grid());
  coordinate(f);
  const CovectorField df = d1(f, order);
  const SymTensor2Field ddf = d2(f, order);
  ScalarField out(f.grid());
  const Grid& grid = *f.grid();
  parallel_for(out.size(), [&](Index n) {
    if (grid.kind(n) == NodeKind::exterior) return;
    const auto gam = g.christoffel_bar(n);
    const Matrix3d inv = g.inverse_bar().mat(n);
    Matrix3d h = ddf.mat(n);
    for (int k = 0; k < 3; ++k) h -= gam[k] * df.vec(n)(k);
    const double lap_bar = (inv.cwiseProduct(h)).sum();
    if (!g.physical()) {
      out[n] = lap_bar;
      return;
    }
    const Vector3d& x = grid.x(n);
    const double rho = DefiningFunction::value(x);
    const Vector3d dr = DefiningFunction::differential(x);
    out[n] = rho * rho * lap_bar - rho * dr.dot(inv * df.vec(n));
  });
  return out;
}

ScalarField divergence(const Metric& g, const VectorField& v) {
  same_grid(g, v.grid());
  coordinate(v);
  const Field<2> dv = d1(v);
  ScalarField out(v.grid());
  parallel_for(out.size(), [&](Index n) {
    if (!evaluable(g, n)) return;
    const auto gam = g.christoffel(n);
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += dv.node(n)(k * 3 + k);
    for (int k = 0; k < 3; ++k) s += gam[k].row(k).dot(v.vec(n));
    out[n] = s;
  });
  return finish(out, g);
}

CovectorField divergence(const Metric& g, const SymTensor2Field& t) {
  same_grid(g, t.grid());
  coordinate(t);
  const Rank3Field dt = d1(t);
  CovectorField out = make_covector(t.grid());
  parallel_for(out.size(), [&](Index n) {
    if (!evaluable(g, n)) return;
    const auto gam = g.christoffel(n);
    const Matrix3d inv = g.inverse(n);
    const Matrix3d tm = t.mat(n);
    const auto d = dt.node(n);
    Vector3d res = Vector3d::Zero();
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
          if (inv(i, k) == 0.0) continue;
          double nabla = d(i * 9 + k * 3 + j);
          for (int m = 0; m < 3; ++m) nabla -= gam[m](i, k) * tm(m, j) + gam[m](i, j) * tm(k, m);
          s += inv(i, k) * nabla;
        }
      res[j] = s;
    }
    out.node(n) = res;
  });
  return finish(out, g);
}

namespace {

// Ricci scalar of the coordinate components ḡ from second derivatives of the metric.
ScalarField ricci_scalar_bar(const Metric& g, int order) {
  const SymTensor2Field& gb = g.bar();
  const Rank3Field dg = d1(gb, order);
  const Rank4Field ddg = d2(gb, order);
  ScalarField out(gb.grid());
  parallel_for(out.size(), [&](Index n) {
    if (gb.grid()->kind(n) == NodeKind::exterior) return;
    const Matrix3d inv = g.inverse_bar().mat(n);
    const auto d = dg.node(n);
    const auto dd = ddg.node(n);
    auto g1 = [&](int m, int i, int j) { return d(m * 9 + i * 3 + j); };
    auto g2 = [&](int m, int p, int i, int j) { return dd(((m * 3 + p) * 3 + i) * 3 + j); };
    double lower[3][3][3];  // Γ_{lij}
    double gam[3][3][3];    // Γ^k_ij
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) lower[l][i][j] = 0.5 * (g1(i, l, j) + g1(j, l, i) - g1(l, i, j));
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = 0.0;
          for (int l = 0; l < 3; ++l) s += inv(k, l) * lower[l][i][j];
          gam[k][i][j] = s;
        }
    // ∂_m Γ^k_ij
    auto dgam = [&](int m, int k, int i, int j) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l) {
        const double dl = 0.5 * (g2(m, i, l, j) + g2(m, j, l, i) - g2(m, l, i, j));
        s += inv(k, l) * dl;
      }
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s -= inv(k, a) * g1(m, a, b) * gam[b][i][j];
      return s;
    };
    double r = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (inv(i, j) == 0.0) continue;
        double rij = 0.0;
        for (int k = 0; k < 3; ++k) {
          rij += dgam(k, k, i, j) - dgam(j, k, i, k);
          for (int m = 0; m < 3; ++m) rij += gam[k][k][m] * gam[m][i][j] - gam[k][j][m] * gam[m][i][k];
        }
        r += inv(i, j) * rij;
      }
    out[n] = r;
  });
  return out;
}

}  // namespace

ScalarField scalar_curvature(const Metric& g, int order) {
  ScalarField rbar = ricci_scalar_bar(g, order);
  if (!g.physical()) return rbar;
  // R[ρ⁻²ḡ] = ρ² R̄ + 4ρ Δ̄ρ - 6 |dρ|²_ḡ
  const Grid& grid = *g.grid();
  ScalarField out(g.grid());
  for (Index n = 0; n < grid.size(); ++n) {
    if (grid.kind(n) == NodeKind::exterior) continue;
    const Vector3d& x = grid.x(n);
    const double rho = DefiningFunction::value(x);
    const Vector3d dr = DefiningFunction::differential(x);
    const Matrix3d inv = g.inverse_bar().mat(n);
    const auto gam = g.christoffel_bar(n);
    Matrix3d h = DefiningFunction::hessian();
    for (int k = 0; k < 3; ++k) h -= gam[k] * dr[k];
    const double lap = inv.cwiseProduct(h).sum();
    out[n] = rho * rho * rbar[n] + 4.0 * rho * lap - 6.0 * dr.dot(inv * dr);
  }
  return out;
}

SymTensor2Field conformal_killing(const Metric& g, const VectorField& x, int order) {
  same_grid(g, x.grid());
  coordinate(x);
  const Field<2> dx = d1(x, order);
  SymTensor2Field out(x.grid());
  parallel_for(out.size(), [&](Index n) {
    if (!evaluable(g, n)) return;
    const auto gam = g.christoffel(n);
    const Matrix3d gm = g.components(n);
    Matrix3d nab;  // nab(i, k) = ∇_i X^k
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) nab(i, k) = dx.node(n)(i * 3 + k) + gam[k].row(i).dot(x.vec(n));
    const Matrix3d low = nab * gm;  // ∇_i X_j
    const double div = nab.trace();
    out.set_mat(n, 0.5 * (low + low.transpose()) - div / 3.0 * gm);
  });
  return finish(out, g);
}

namespace {

// Radial conservative form. For λ̄ = A n̂n̂ + B(δ - n̂n̂) the physical metric is
// a² dr² + b² dΩ² with a = √A/ρ, b = √B r/ρ. With q = (a/b) w the conformal Killing
// operator has the single profile (𝒟W)_r̂r̂ = ⅔ (b/a) q', its energy is ⅔ ∫ q'² b⁴/a dr,
// and L W = -⅔ (a/b) (b⁴/a q')' / (a³ b²).
struct RadialProfiles {
  Eigen::VectorXd s, mass, c_mid;
};

RadialProfiles radial_profiles(const Metric& g) {
  const Grid& grid = *g.grid();
  const Index n = grid.size();
  const double h = grid.h();
  RadialProfiles p;
  p.s = Eigen::VectorXd::Zero(n);
  p.mass = Eigen::VectorXd::Zero(n);
  p.c_mid = Eigen::VectorXd::Zero(n);
  for (Index i = 1; i < n; ++i) {
    const double r = grid.r(i);
    const double a2 = g.bar().mat(i)(0, 0), b2 = g.bar().mat(i)(1, 1);
    p.s[i] = std::sqrt(a2 / b2) / r;
    if (i < n - 1) {
      const double rho = DefiningFunction::value(grid.x(i));
      // r² h replaced by the cell moment ∫ r⁴ dr / r, exact for the odd leading behaviour at the origin
      const double moment = r * r + 0.5 * h * h + std::pow(h, 4) / (80.0 * r * r);
      p.mass[i] = std::pow(a2, 1.5) * b2 * moment / std::pow(rho, 5) * h;
    }
  }
  for (Index i = 1; i + 1 < n; ++i) {
    const double rm = (i + 0.5) * h;
    const double rho = 0.5 * (1.0 - rm * rm);
    const double a2 = 0.5 * (g.bar().mat(i)(0, 0) + g.bar().mat(i + 1)(0, 0));
    const double b2 = 0.5 * (g.bar().mat(i)(1, 1) + g.bar().mat(i + 1)(1, 1));
    p.c_mid[i] = b2 * b2 * std::pow(rm, 4) / (std::pow(rho, 3) * std::sqrt(a2));
  }
  return p;
}

VectorField radial_vector_laplacian(const Metric& g, const VectorField& w) {
  const Grid& grid = *g.grid();
  const Index n = grid.size();
  const double h = grid.h();
  const RadialProfiles p = radial_profiles(g);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  for (Index i = 1; i < n; ++i) q[i] = p.s[i] * w.node(i)(0);
  // midpoint conformal Killing profile, scaled by the energy density
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(n);
  for (Index i = 1; i + 1 < n; ++i) flux[i] = p.c_mid[i] * (q[i + 1] - q[i]) / h;
  VectorField out(w.grid());
  for (Index i = 1; i + 1 < n; ++i) {
    const double div = flux[i] - flux[i - 1];
    out.node(i)(0) = -(2.0 / 3.0) * p.s[i] * div / p.mass[i];
  }
  out.set_support(Support::interior);
  return out;
}

// With q = s w = ρᵖ v the flux (b⁴/a) q' is ρ^{p-3} (P v' - p r P v/ρ) where
// P = B² r⁴/√A is smooth. Its derivative is expanded so that all powers of ρ multiply v
// and v' pointwise: ρ^{5-p} F' = ρ²(P v')' - (2p-3) r P ρ v' - p (rP)' ρ v + p(p-4) r² P v.
VectorField reduced_vector_laplacian_radial(const Metric& g, const VectorField& u, int power) {
  const Grid& grid = *g.grid();
  const Index n = grid.size();
  const double h = grid.h();
  auto A = [&](Index i) { return g.bar().mat(i)(0, 0); };
  auto B = [&](Index i) { return g.bar().mat(i)(1, 1); };
  // P = r⁴ k with k = B²/√A smooth and even
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n), k = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i) {
    k[i] = B(i) * B(i) / std::sqrt(A(i));
    if (i == 0) continue;
    s[i] = std::sqrt(A(i) / B(i)) / grid.r(i);
    v[i] = s[i] * u.node(i)(0);
  }
  v[0] = (4.0 * v[1] - v[2]) / 3.0;  // v is even in r
  VectorField out(u.grid());
  for (Index i = 1; i < n; ++i) {
    const double r = grid.r(i);
    const double p = std::pow(r, 4) * k[i];
    const double pw = power;
    double e;  // ρ^{5-p} F'
    if (i == n - 1) {
      e = pw * (pw - 4.0) * r * r * p * v[i];
    } else {
      const double rho = DefiningFunction::value(grid.x(i));
      const double dk = (k[i + 1] - k[i - 1]) / (2.0 * h);
      const double dp = 4.0 * std::pow(r, 3) * k[i] + std::pow(r, 4) * dk;
      const double drp = 5.0 * std::pow(r, 4) * k[i] + std::pow(r, 5) * dk;
      e = rho * rho * (p * (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) + dp * (v[i + 1] - v[i - 1]) / (2.0 * h)) -
          (2.0 * pw - 3.0) * r * p * rho * (v[i + 1] - v[i - 1]) / (2.0 * h) +
          pw * ((pw - 4.0) * r * r * p - drp * rho) * v[i];
    }
    out.node(i)(0) = -(2.0 / 3.0) * s[i] * e / (std::pow(A(i), 1.5) * B(i) * r * r);
  }
  return out;
}

VectorField covariant_vector_laplacian(const Metric& g, const VectorField& w) {
  const Grid& grid = *g.grid();
  const Field<2> dw = d1(w);
  const Field<3> ddw = d2(w);
  const Rank4Field dgam = d1(g.connection_bar());
  VectorField out(w.grid());
  parallel_for(grid.size(), [&](Index n) {
    if (!evaluable(g, n)) return;
    const auto gam = g.christoffel_bar(n);
    const Matrix3d inv = g.inverse_bar().mat(n);
    const Matrix3d gm = g.bar().mat(n);
    const Vector3d wv = w.vec(n);
    auto dW = [&](int i, int k) { return dw.node(n)(i * 3 + k); };
    auto ddW = [&](int l, int i, int k) { return ddw.node(n)((l * 3 + i) * 3 + k); };
    auto dG = [&](int l, int k, int i, int m) { return dgam.node(n)(l * 27 + k * 9 + i * 3 + m); };
    double nab[3][3];  // ∇_i W^k
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) nab[i][k] = dW(i, k) + gam[k].row(i).dot(wv);
    // N^k_li = ∇_l ∇_i W^k
    auto second = [&](int k, int l, int i) {
      double s = ddW(l, i, k);
      for (int m = 0; m < 3; ++m) {
        s += dG(l, k, i, m) * wv[m] + gam[k](i, m) * dW(l, m);
        s -= gam[m](l, i) * nab[m][k];
        s += gam[k](l, m) * nab[i][m];
      }
      return s;
    };
    double nn[3][3][3];
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i) nn[k][l][i] = second(k, l, i);
    Vector3d lap, grad_div, div_low;
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i) s += inv(l, i) * nn[k][l][i];
      lap[k] = s;
    }
    for (int j = 0; j < 3; ++j) {
      double a = 0.0, b = 0.0;
      for (int l = 0; l < 3; ++l) a += nn[l][l][j];  // ∇_l ∇_j W^l
      for (int m = 0; m < 3; ++m) b += nn[m][j][m];  // ∇_j ∇_m W^m
      grad_div[j] = a;
      div_low[j] = b;
    }
    // (Div 𝒟W)_j = ½ g_jk ΔW^k + ½ ∇_l∇_j W^l - ⅓ ∇_j Div W
    Vector3d div_d = 0.5 * gm * lap + 0.5 * grad_div - div_low / 3.0;
    if (!g.physical()) {
      out.node(n) = -inv * div_d;
      return;
    }
    // L_λ W = -ρ² ḡ⁻¹ (Div_ḡ 𝒟_ḡW - 3ρ⁻¹ 𝒟_ḡW(grad_ḡ ρ, ·))
    const Vector3d& x = grid.x(n);
    const double rho = DefiningFunction::value(x);
    const Vector3d up = inv * DefiningFunction::differential(x);
    Matrix3d low;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) low(i, j) = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) low(i, j) += nab[i][k] * gm(k, j);
    double div = 0.0;
    for (int k = 0; k < 3; ++k) div += nab[k][k];
    const Matrix3d dbar = 0.5 * (low + low.transpose()) - div / 3.0 * gm;
    div_d -= 3.0 / rho * (dbar * up);
    out.node(n) = -rho * rho * (inv * div_d);
  });
  return finish(out, g);
}

}  // namespace

VectorField vector_laplacian_apply(const Metric& g, const VectorField& w) {
  same_grid(g, w.grid());
  coordinate(w);
  if (g.grid()->mode() == GridMode::radial1d && g.physical()) return radial_vector_laplacian(g, w);
  return covariant_vector_laplacian(g, w);
}

VectorField reduced_vector_laplacian(const Metric& g, const VectorField& u, int power) {
  same_grid(g, u.grid());
  if (power < 1 || power > 3) throw WeightWindowError("reduced vector Laplacian power must be 1, 2 or 3");
  coordinate(u);
  if (g.grid()->mode() != GridMode::radial1d || !g.physical())
    throw FrameError("the reduced vector Laplacian needs a radial physical metric");
  return reduced_vector_laplacian_radial(g, u, power);
}

Eigen::VectorXd radial_vector_mass(const Metric& g) {
  if (g.grid()->mode() != GridMode::radial1d || !g.physical())
    throw FrameError("radial mass weights need a radial physical metric");
  return radial_profiles(g).mass;
}

VectorField cross(const Metric& g, const VectorField& x, const VectorField& y) {
  same_grid(g, x.grid());
  same_grid(g, y.grid());
  coordinate(x);
  coordinate(y);
  VectorField out(x.grid());
  parallel_for(out.size(), [&](Index n) {
    if (!evaluable(g, n)) return;
    const Vector3d c = x.vec(n).cross(y.vec(n));  // ε_{lij} X^i Y^j with the flat symbol
    out.node(n) = g.volume_factor(n) * (g.inverse(n) * c);
  });
  return finish(out, g);
}

SymTensor2Field trace_free_part(const Metric& g, const SymTensor2Field& t) {
  same_grid(g, t.grid());
  SymTensor2Field out = t;
  for (Index n = 0; n < t.size(); ++n) {
    const Matrix3d gm = g.bar().mat(n);
    const double tr = g.inverse_bar().mat(n).cwiseProduct(t.mat(n)).sum();
    out.set_mat(n, t.mat(n) - tr / 3.0 * gm);
  }
  return out;
}

Metric conformal_rescale(const Metric& g, const ScalarField& theta, double exponent) {
  same_grid(g, theta.grid());
  if ((theta.data().array() <= 0.0).any()) throw DomainError("conformal factor must be positive");
  SymTensor2Field bar = g.bar();
  for (Index n = 0; n < bar.size(); ++n) bar.set_mat(n, std::pow(theta[n], exponent) * bar.mat(n));
  return Metric(bar, g.frame());
}

ScalarField trace(const Metric& g, const SymTensor2Field& t) {
  same_grid(g, t.grid());
  ScalarField out(t.grid());
  for (Index n = 0; n < t.size(); ++n) {
    if (!evaluable(g, n)) continue;
    out[n] = g.inverse(n).cwiseProduct(t.mat(n)).sum();
  }
  return finish(out, g);
}

ScalarField norm_squared(const Metric& g, const SymTensor2Field& t) {
  same_grid(g, t.grid());
  ScalarField out(t.grid());
  for (Index n = 0; n < t.size(); ++n) {
    if (!evaluable(g, n)) continue;
    const Matrix3d inv = g.inverse(n);
    const Matrix3d tm = t.mat(n);
    out[n] = (inv * tm * inv * tm.transpose()).trace();
  }
  return finish(out, g);
}

ScalarField norm_squared(const Metric& g, const VectorField& v) {
  same_grid(g, v.grid());
  ScalarField out(v.grid());
  for (Index n = 0; n < v.size(); ++n) {
    if (!evaluable(g, n)) continue;
    out[n] = v.vec(n).dot(g.components(n) * v.vec(n));
  }
  return finish(out, g);
}

CovectorField lower(const Metric& g, const VectorField& v) {
  same_grid(g, v.grid());
  CovectorField out = make_covector(v.grid());
  for (Index n = 0; n < v.size(); ++n)
    if (evaluable(g, n)) out.node(n) = g.components(n) * v.vec(n);
  return finish(out, g);
}

VectorField raise(const Metric& g, const CovectorField& w) {
  same_grid(g, w.grid());
  VectorField out(w.grid());
  for (Index n = 0; n < w.size(); ++n)
    if (evaluable(g, n)) out.node(n) = g.inverse(n) * w.vec(n);
  out = finish(out, g);
  if (w.support() == Support::interior) out.set_support(Support::interior);
  return out;
}

CovectorField contract(const SymTensor2Field& t, const VectorField& v) {
  if (t.grid() != v.grid()) throw FrameError("fields live on different grids");
  CovectorField out = make_covector(t.grid());
  for (Index n = 0; n < t.size(); ++n) out.node(n) = t.mat(n).transpose() * v.vec(n);
  if (t.support() == Support::interior || v.support() == Support::interior) out.set_support(Support::interior);
  return out;
}

}  // namespace hyp

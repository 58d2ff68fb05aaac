#include "hyperboloidal/pipeline.hpp"

#include <array>
#include <cmath>
#include <future>

#include "hyperboloidal/tensor_ops.hpp"

namespace hyp {

namespace {

void require_positive(const ScalarField& t, const char* what) {
  const Grid& grid = *t.grid();
  for (Index n = 0; n < grid.size(); ++n)
    if (grid.kind(n) != NodeKind::exterior && !(t[n] > 0.0)) throw DomainError(std::string(what) + " must be positive");
}

// The first three nodes with ρ ≥ cutoff along the lattice direction closest to the inward normal at n,
// and the offset of the first one.
std::pair<int, std::array<Index, 3>> inward_layers(const Grid& grid, const DefiningFunction& rho, Index n,
                                                   double cutoff) {
  const Vector3d& x = grid.x(n);
  const double top = x.cwiseAbs().maxCoeff();
  std::array<int, 3> dir{};
  for (int a = 0; a < 3; ++a)
    if (std::abs(x[a]) >= 0.5 * top) dir[a] = x[a] < 0 ? 1 : -1;
  auto walk = [&](int k) {
    Index m = n;
    for (int a = 0; a < 3 && m >= 0; ++a)
      if (dir[a] != 0) m = grid.neighbor(m, a, dir[a] * k);
    return m;
  };
  int d = 0;
  for (int off = 1; off <= 6 && d == 0; ++off) {
    const Index m = walk(off);
    if (m >= 0 && grid.interior(m) && rho(m) >= cutoff) d = off;
  }
  if (d == 0) throw DomainError("no interior layer next to a boundary node");
  std::array<Index, 3> out{};
  for (int l = 0; l < 3; ++l) {
    out[l] = walk(d + l);
    if (out[l] < 0 || !grid.interior(out[l])) throw DomainError("too few interior layers for extrapolation");
  }
  return {d, out};
}

// Replaces t on the non-exterior nodes with ρ < cutoff by quadratic extrapolation from deeper nodes.
void fill_boundary_layer(SymTensor2Field& t, const DefiningFunction& rho, double cutoff) {
  const Grid& grid = *t.grid();
  const SymTensor2Field src = t;
  for (Index n = 0; n < grid.size(); ++n) {
    if (grid.kind(n) == NodeKind::exterior || rho(n) >= cutoff) continue;
    const auto [d, layer] = inward_layers(grid, rho, n, cutoff);
    const double w[3] = {0.5 * (d + 1) * (d + 2), -1.0 * d * (d + 2), 0.5 * d * (d + 1)};
    Eigen::Matrix<double, 9, 1> v = Eigen::Matrix<double, 9, 1>::Zero();
    for (int l = 0; l < 3; ++l) v += w[l] * src.node(layer[l]);
    t.node(n) = v;
  }
  t.set_support(Support::all);
}

// Largest |t| on the sphere ρ = 0, by quadratic extrapolation in ρ from the interior layers.
double sphere_sup(const SymTensor2Field& t, const DefiningFunction& rho) {
  const Grid& grid = *t.grid();
  double out = 0.0;
  for (Index n : grid.boundary_nodes()) {
    const auto layer = inward_layers(grid, rho, n, 0.0).second;
    const double r0 = rho(layer[0]), r1 = rho(layer[1]), r2 = rho(layer[2]);
    const double w0 = r1 * r2 / ((r0 - r1) * (r0 - r2)), w1 = r0 * r2 / ((r1 - r0) * (r1 - r2)),
                 w2 = r0 * r1 / ((r2 - r0) * (r2 - r1));
    out = std::max(out, (w0 * t.node(layer[0]) + w1 * t.node(layer[1]) + w2 * t.node(layer[2])).norm());
  }
  return out;
}

ScalarField power(const ScalarField& t, double p) {
  ScalarField out = t;
  out.data() = t.data().array().pow(p).matrix();
  return out;
}

}  // namespace

PipelineMode parse_pipeline_mode(const std::string& s) {
  if (s == "shearfree") return PipelineMode::shearfree;
  if (s == "weak") return PipelineMode::weak;
  throw DomainError("unknown pipeline mode '" + s + "'");
}

std::string to_string(PipelineMode m) { return m == PipelineMode::shearfree ? "shearfree" : "weak"; }

MatterFields matter_scale(const ScalarField& t, const MatterFields& f) {
  require_positive(t, "matter scaling factor");
  const ScalarField t3 = power(t, -3.0), t4 = power(t, -4.0), t5 = power(t, -5.0);
  MatterFields out{t3 * f.e, t3 * f.b, t5 * f.j, f.zeta};
  out.zeta.data() = (f.zeta.data().array() * t4.data().array()).matrix();
  return out;
}

VectorField momentum_source(const Metric& lambda, const SymTensor2Field& t_bar, const MatterFields& psi) {
  const GridPtr& gp = lambda.grid();
  const Grid& grid = *gp;
  const Metric lbar = lambda.as_compactified();
  const CovectorField div = divergence(lbar, t_bar);
  const VectorField exb = cross(lambda, psi.e, psi.b);
  VectorField out(gp);
  out.set_support(Support::interior);
  for (Index n : grid.interior_nodes()) {
    const Vector3d& x = grid.x(n);
    const double rho = DefiningFunction::value(x);
    const Matrix3d inv = lbar.inverse_bar().mat(n);
    const Vector3d grad_rho = inv * DefiningFunction::differential(x);
    const Vector3d cov = rho * div.vec(n) - 2.0 * t_bar.mat(n) * grad_rho;
    out.node(n) = rho * rho * (inv * cov) - psi.j.vec(n) - exb.vec(n);
  }
  return out;
}

std::pair<SeedData, SeedReport> project_free_to_seed(const FreeData& free, PipelineMode mode, const PipelineOptions& opts) {
  const Metric& lambda = free.lambda;
  if (!lambda.physical()) throw FrameError("free data metric must carry the physical tag");
  const GridPtr& gp = lambda.grid();
  const Grid& grid = *gp;
  const Metric lbar = lambda.as_compactified();
  SeedReport report;

  double nu_scale = 0.0, nu_trace = 0.0;
  for (Index n : grid.interior_nodes()) {
    nu_scale = std::max(nu_scale, free.nu_bar.node(n).norm());
    nu_trace = std::max(nu_trace, std::abs(lbar.inverse_bar().mat(n).cwiseProduct(free.nu_bar.mat(n)).sum()));
    if (free.matter.zeta[n] < -1e-13) throw DomainError("free data ζ must be non-negative");
  }
  if (nu_trace > 1e-11 * std::max(1.0, nu_scale)) throw DomainError("free data ν is not trace-free");
  if (nu_scale > 0.0 && grid.mode() == GridMode::ball3d) {
    report.nu_boundary_ratio = sphere_sup(free.nu_bar, DefiningFunction(gp)) / nu_scale;
  } else if (nu_scale > 0.0) {
    const BoundaryTrace nb = boundary_restrict(free.nu_bar, 2);
    for (Index k = 0; k < nb.values.cols(); ++k) report.nu_boundary_ratio = std::max(report.nu_boundary_ratio, nb.values.col(k).norm() / nu_scale);
  }
  const double h = grid.h();
  if (mode == PipelineMode::shearfree && report.nu_boundary_ratio > opts.bc_constant * h * h)
    throw DomainError("shear-free mode needs ν in C_2 (ρν must vanish on the boundary)");

  // the two Helmholtz splits are independent
  auto fe = std::async(std::launch::async, [&] { return helmholtz_split(lambda, free.matter.e, opts.linear); });
  HelmholtzSplit sb = helmholtz_split(lambda, free.matter.b, opts.linear);
  HelmholtzSplit se = fe.get();
  report.helmholtz_e = se.report;
  report.helmholtz_b = sb.report;

  SeedData seed{lambda, SymTensor2Field(gp), MatterFields{se.y, sb.y, free.matter.j, free.matter.zeta}};
  for (VectorField* v : {&seed.psi.e, &seed.psi.b}) {
    for (Index n : grid.boundary_nodes()) v->node(n).setZero();
    v->set_support(Support::all);
  }

  const DefiningFunction rho(gp);
  SymTensor2Field mu = H_tensor(lbar, rho) + free.nu_bar;
  const VectorField y = momentum_source(lambda, mu, seed.psi);
  SymTensor2Field sigma(gp);
  if (grid.mode() == GridMode::radial1d) {
    // W = ρᵖU with p = 3 (W in C_2) or p = 2 (W in C_1):
    // ρ⁻¹𝒟W = ρ^{p-1}𝒟U + p ρ^{p-2} (sym(dρ ⊗ U♭) - ⅓⟨dρ, U⟩ λ̄), with no division by ρ
    const int p = mode == PipelineMode::shearfree ? 3 : 2;
    auto [u, vrep] = solve_reduced_vector_laplacian(lambda, y, p, opts.linear);
    report.vector = vrep;
    const SymTensor2Field du = conformal_killing(lbar, u);
    for (Index n = 0; n < grid.size(); ++n) {
      const Matrix3d gb = lbar.components(n);
      const Vector3d ub = gb * u.vec(n);
      const Vector3d dr = rho.d(n);
      const Matrix3d sym = 0.5 * (dr * ub.transpose() + ub * dr.transpose()) - dr.dot(u.vec(n)) / 3.0 * gb;
      const double r = rho(n);
      sigma.set_mat(n, mu.mat(n) + std::pow(r, p - 1) * du.mat(n) + p * std::pow(r, p - 2) * sym);
    }
  } else {
    auto [w, vrep] = solve_vector_laplacian(lambda, y, opts.linear);
    report.vector = vrep;
    const SymTensor2Field dw = conformal_killing(lbar, w);
    for (Index n : grid.interior_nodes()) sigma.set_mat(n, mu.mat(n) + dw.mat(n) / rho(n));
    fill_boundary_layer(sigma, rho, h);
  }
  seed.sigma_bar = trace_free_part(lbar, sigma);
  for (Index n : grid.interior_nodes())
    report.trace = std::max(report.trace, std::abs(lbar.inverse_bar().mat(n).cwiseProduct(seed.sigma_bar.mat(n)).sum()));

  if (mode == PipelineMode::shearfree) {
    const SymTensor2Field hb = H_tensor(lbar, rho);
    const BoundaryTrace target = [&] {
      BoundaryTrace t;
      t.grid = gp;
      t.rank = 2;
      t.nodes = grid.boundary_nodes();
      t.values.resize(9, static_cast<Index>(t.nodes.size()));
      for (std::size_t k = 0; k < t.nodes.size(); ++k) t.values.col(static_cast<Index>(k)) = hb.node(t.nodes[k]);
      return t;
    }();
    SymTensor2Field interior_sigma = seed.sigma_bar;
    interior_sigma.set_support(Support::interior);
    report.sigma_bc_checked = true;
    report.sigma_bc_mismatch = boundary_restrict(interior_sigma, 2).sup_distance(target);
    report.sigma_bc_mismatch_first = boundary_restrict(interior_sigma, 1).sup_distance(target);
    if (report.sigma_bc_mismatch > opts.bc_constant * h * h)
      throw DomainError("seed violates the shear-free boundary condition beyond C·h²");
  }
  return {seed, report};
}

FreeData right_inverse(const SeedData& seed) {
  const Metric lbar = seed.lambda.as_compactified();
  const DefiningFunction rho(seed.lambda.grid());
  return FreeData{seed.lambda, seed.sigma_bar - H_tensor(lbar, rho), seed.psi};
}

std::pair<InitialData, NewtonReport> seed_to_data(const SeedData& seed, const PipelineOptions& opts) {
  const LichCoefficients c = assemble_coefficients(seed);
  auto [phi, nrep] = solve_lichnerowicz(seed.lambda, c, opts.newton);
  const Metric g = conformal_rescale(seed.lambda, phi, 4.0);
  ScalarField phi2 = phi;
  phi2.data() = phi.data().array().square().matrix();
  InitialData data{g, power(phi, -2.0) * seed.sigma_bar, matter_scale(phi2, seed.psi), phi};
  data.sigma_bar.set_support(Support::all);
  return {data, nrep};
}

SeedData gauge_transform(const SeedData& seed, const ScalarField& theta) {
  require_positive(theta, "gauge factor θ");
  ScalarField tm1 = theta;
  tm1.data().array() -= 1.0;
  const BoundaryTrace tb = boundary_restrict(tm1, 2);
  const double hh = theta.grid()->h();
  if (tb.values.size() && tb.values.cwiseAbs().maxCoeff() > 1e-8 + hh * hh) throw DomainError("gauge factor θ must equal 1 on the boundary");
  ScalarField theta2 = theta;
  theta2.data() = theta.data().array().square().matrix();
  SeedData out{conformal_rescale(seed.lambda, theta, 4.0), power(theta, -2.0) * seed.sigma_bar, matter_scale(theta2, seed.psi)};
  out.sigma_bar.set_support(Support::all);
  return out;
}

}  // namespace hyp

#include "hyperboloidal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "hyperboloidal/tensor_ops.hpp"

namespace hyp {

namespace {

double rho_at(const Grid& g, Index n) { return DefiningFunction::value(g.x(n)); }

CovectorField compact_momentum(const Metric& metric, const SymTensor2Field& t_bar, const MatterFields& m) {
  const Metric bar = metric.as_compactified();
  const GridPtr& gp = metric.grid();
  const Grid& grid = *gp;
  const CovectorField div = divergence(bar, t_bar);
  const VectorField grad_rho = gradient(bar, DefiningFunction(gp).rho());
  const CovectorField t_grad = contract(t_bar, grad_rho);
  const CovectorField exb = lower(bar, cross(bar, m.e, m.b));
  const CovectorField j = lower(bar, m.j);
  CovectorField out = make_covector(gp);
  out.set_support(Support::interior);
  for (Index n : grid.interior_nodes()) {
    const double rho = rho_at(grid, n);
    out.node(n) = rho * div.vec(n) - 2.0 * t_grad.vec(n) - exb.vec(n) / (rho * rho * rho) - j.vec(n) / (rho * rho);
  }
  return out;
}

double sup_diff(const Grid& grid, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double s = 0.0;
  for (Index n : grid.interior_nodes()) s = std::max(s, (a.col(n) - b.col(n)).norm());
  return s;
}

InitialData rebuild(const SeedData& seed, const ScalarField& phi) {
  ScalarField phi2 = phi, phim2 = phi;
  phi2.data() = phi.data().array().square().matrix();
  phim2.data() = phi.data().array().pow(-2.0).matrix();
  InitialData d{conformal_rescale(seed.lambda, phi, 4.0), phim2 * seed.sigma_bar, matter_scale(phi2, seed.psi), phi};
  d.sigma_bar.set_support(Support::all);
  return d;
}

CheckEntry check_max(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value <= tol, "max"};
}
CheckEntry check_min(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value >= tol, "min"};
}

Vector3d covariance_center() { return Vector3d(0.3, -0.2, 0.4); }

Index nearest_node(const Grid& g, const Vector3d& c) {
  Index best = 0;
  double d = std::numeric_limits<double>::max();
  for (Index n = 0; n < g.size(); ++n)
    if ((g.x(n) - c).norm() < d) {
      d = (g.x(n) - c).norm();
      best = n;
    }
  return best;
}

PresetParams covariance_metric() {
  PresetParams p;
  p.metric = "perturbed";
  p.metric_epsilon = 0.3;
  p.metric_anisotropy = 0.5;
  return p;
}

}  // namespace

template <int R>
NormPair norms(const Field<R>& f) {
  const Grid& grid = *f.grid();
  NormPair out;
  double num = 0.0, den = 0.0;
  for (Index n : grid.interior_nodes()) {
    const double v = f.node(n).norm();
    out.sup = std::max(out.sup, v);
    const double w = grid.mode() == GridMode::radial1d ? grid.x(n).squaredNorm() + 1e-300 : 1.0;
    num += w * v * v;
    den += w;
  }
  out.l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;
  return out;
}
template NormPair norms<0>(const Field<0>&);
template NormPair norms<1>(const Field<1>&);
template NormPair norms<2>(const Field<2>&);

ScalarField hamiltonian_residual(const InitialData& d) {
  const Metric bar = d.g.as_compactified();
  const GridPtr& gp = d.g.grid();
  const Grid& grid = *gp;
  const ScalarField r = scalar_curvature(d.g);
  const ScalarField s2 = norm_squared(bar, d.sigma_bar);
  const ScalarField tr = trace(bar, d.sigma_bar);
  const ScalarField e2 = norm_squared(bar, d.matter.e);
  const ScalarField b2 = norm_squared(bar, d.matter.b);
  ScalarField out(gp);
  out.set_support(Support::interior);
  for (Index n : grid.interior_nodes()) {
    const double rho = rho_at(grid, n);
    const double k2 = rho * rho * s2[n] - 2.0 * rho * tr[n] + 3.0;
    out[n] = r[n] - k2 + 9.0 - (e2[n] + b2[n]) / (rho * rho) - 2.0 * d.matter.zeta[n];
  }
  return out;
}

CovectorField momentum_residual(const InitialData& d) { return compact_momentum(d.g, d.sigma_bar, d.matter); }

std::pair<ScalarField, ScalarField> maxwell_residual(const InitialData& d) {
  return {divergence(d.g, d.matter.e), divergence(d.g, d.matter.b)};
}

CovectorField seed_momentum_residual(const SeedData& s) { return compact_momentum(s.lambda, s.sigma_bar, s.psi); }

double ConstraintResiduals::max_sup() const {
  return std::max({hamiltonian.sup, momentum.sup, maxwell_e.sup, maxwell_b.sup});
}

ConstraintResiduals constraint_residuals(const InitialData& d) {
  ConstraintResiduals out;
  auto ham = std::async(std::launch::async, [&] { return norms(hamiltonian_residual(d)); });
  out.momentum = norms(momentum_residual(d));
  const auto [me, mb] = maxwell_residual(d);
  out.maxwell_e = norms(me);
  out.maxwell_b = norms(mb);
  out.hamiltonian = ham.get();
  const ScalarField tr = trace(d.g.as_compactified(), d.sigma_bar);
  const Grid& grid = *d.g.grid();
  for (Index n : grid.interior_nodes()) out.cmc_deviation = std::max(out.cmc_deviation, rho_at(grid, n) * std::abs(tr[n]));
  return out;
}

SeedResiduals seed_residuals(const SeedData& s) {
  SeedResiduals out;
  out.momentum = norms(seed_momentum_residual(s));
  out.div_e = norms(divergence(s.lambda, s.psi.e));
  out.div_b = norms(divergence(s.lambda, s.psi.b));
  const ScalarField tr = trace(s.lambda.as_compactified(), s.sigma_bar);
  for (Index n : s.lambda.grid()->interior_nodes()) out.trace = std::max(out.trace, std::abs(tr[n]));
  return out;
}

ShearCheck shear_check(const InitialData& d, PipelineMode mode) {
  ShearCheck out;
  if (mode == PipelineMode::weak) {
    out.note = "not-applicable";
    return out;
  }
  out.applicable = true;
  const Metric bar = d.g.as_compactified();
  const GridPtr& gp = d.g.grid();
  const SymTensor2Field hb = H_tensor(bar, DefiningFunction(gp));
  SymTensor2Field s = d.sigma_bar;
  s.set_support(Support::interior);
  const BoundaryTrace s2 = boundary_restrict(s, 2), s1 = boundary_restrict(s, 1);
  BoundaryTrace target = s2;
  for (std::size_t k = 0; k < target.nodes.size(); ++k) target.values.col(static_cast<Index>(k)) = hb.node(target.nodes[k]);
  out.mismatch = s2.sup_distance(target);
  out.mismatch_first = s1.sup_distance(target);
  out.tangential = tangential_shear_mismatch(bar, s2, shear_tensor(bar));
  return out;
}

bool ResidualReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckEntry& c) { return c.passed || c.kind == "info"; });
}

ConvergenceResult fit_rate(std::string name, std::vector<StudyRow> rows) {
  ConvergenceResult out;
  out.name = std::move(name);
  out.rows = std::move(rows);
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (!(out.rows[k].error < out.rows[k - 1].error)) out.monotone = false;
  out.saturated = std::all_of(out.rows.begin(), out.rows.end(), [](const StudyRow& r) { return r.error < 1e-12; });
  if (out.saturated || out.rows.size() < 2) {
    out.rate = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(out.rows.size());
  for (const auto& r : out.rows) {
    const double x = std::log(r.h), y = std::log(std::max(r.error, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  out.constant = std::exp((sy - out.rate * sx) / m);
  return out;
}

const std::vector<std::string>& convergence_problems() {
  static const std::vector<std::string> v{"manufactured-lichnerowicz", "hyperboloid", "momentum-identity",
                                          "constraints", "gauge", "h-covariance"};
  return v;
}

std::vector<ConvergenceResult> convergence_study(const std::string& problem, const std::vector<int>& resolutions,
                                                 const PresetParams& params, PipelineMode mode, GridMode grid_mode,
                                                 const PipelineOptions& opts) {
  if (resolutions.size() < 3) throw DomainError("a convergence study needs at least three resolutions");
  for (std::size_t k = 1; k < resolutions.size(); ++k)
    if (resolutions[k] <= resolutions[k - 1]) throw DomainError("resolutions must be strictly increasing");
  if (std::find(convergence_problems().begin(), convergence_problems().end(), problem) == convergence_problems().end())
    throw DomainError("unknown convergence problem '" + problem + "'");

  std::vector<std::string> names;
  std::vector<std::vector<StudyRow>> series;
  auto record = [&](int n, double h, const std::vector<std::pair<std::string, double>>& vals) {
    if (names.empty())
      for (const auto& v : vals) {
        names.push_back(problem + ":" + v.first);
        series.emplace_back();
      }
    for (std::size_t k = 0; k < vals.size(); ++k) series[k].push_back({n, h, vals[k].second});
  };

  for (int n : resolutions) {
    if (problem == "h-covariance") {
      const GridPtr g = Grid::patch(n, covariance_center(), 3);
      const Metric lam = preset_metric(g, covariance_metric()).as_compactified();
      const ScalarField theta = sample_scalar(g, [](const Vector3d& x) {
        const double r = DefiningFunction::value(x);
        return 1.0 + 0.25 * r * r;
      });
      const Metric lt = conformal_rescale(lam, theta, 4.0);
      const DefiningFunction rho(g);
      const Index c = nearest_node(*g, covariance_center());
      const double t8 = std::pow(theta[c], -8.0);
      const double eh = (H_tensor(lt, rho).mat(c) - t8 * H_tensor(lam, rho).mat(c)).norm();
      const double ea = std::abs(A_scalar(lt, rho)[c] - t8 * A_scalar(lam, rho)[c]);
      record(n, g->h(), {{"H", eh}, {"A", ea}});
      continue;
    }
    const GridPtr g = make_grid(grid_mode, n);
    const Grid& grid = *g;
    if (problem == "manufactured-lichnerowicz") {
      const Metric h = background_structures(g).second;
      const ScalarField target = manufactured_target(g, params.phi_star_epsilon);
      auto [phi, rep] = solve_lichnerowicz(h, manufactured_source(h, target), opts.newton);
      record(n, grid.h(), {{"phi", sup_diff(grid, phi.data(), target.data())}});
      continue;
    }
    const FreeData free = make_free_data(g, params);
    auto [seed, srep] = project_free_to_seed(free, mode, opts);
    if (problem == "momentum-identity") {
      const SeedResiduals r = seed_residuals(seed);
      std::vector<std::pair<std::string, double>> vals{{"momentum", r.momentum.sup}, {"div_e", r.div_e.sup}, {"div_b", r.div_b.sup}};
      if (srep.sigma_bc_checked) vals.push_back({"sigma_bc", srep.sigma_bc_mismatch});
      record(n, grid.h(), vals);
      continue;
    }
    auto [data, nrep] = seed_to_data(seed, opts);
    if (problem == "hyperboloid") {
      ScalarField one(g);
      one.data().setOnes();
      const ConstraintResiduals r = constraint_residuals(data);
      record(n, grid.h(), {{"phi", sup_diff(grid, data.phi.data(), one.data())}, {"constraints", r.max_sup()}});
    } else if (problem == "constraints") {
      const ConstraintResiduals r = constraint_residuals(data);
      record(n, grid.h(), {{"hamiltonian", r.hamiltonian.sup}, {"momentum", r.momentum.sup},
                           {"maxwell_e", r.maxwell_e.sup}, {"maxwell_b", r.maxwell_b.sup}});
    } else if (problem == "gauge") {
      const double a = params.theta_amplitude != 0.0 ? params.theta_amplitude : 0.5;
      const ScalarField theta = preset_theta(g, a);
      auto [data2, nrep2] = seed_to_data(gauge_transform(seed, theta), opts);
      ScalarField expect = data.phi;
      expect.data() = (data.phi.data().array() / theta.data().array()).matrix();
      const double dm = std::max({sup_diff(grid, data.matter.e.data(), data2.matter.e.data()),
                                  sup_diff(grid, data.matter.b.data(), data2.matter.b.data()),
                                  sup_diff(grid, data.matter.j.data(), data2.matter.j.data()),
                                  sup_diff(grid, data.matter.zeta.data(), data2.matter.zeta.data())});
      record(n, grid.h(), {{"metric", sup_diff(grid, data.g.bar().data(), data2.g.bar().data())},
                           {"sigma", sup_diff(grid, data.sigma_bar.data(), data2.sigma_bar.data())},
                           {"phi", sup_diff(grid, data2.phi.data(), expect.data())},
                           {"matter", dm}});
    }
  }
  std::vector<ConvergenceResult> out;
  for (std::size_t k = 0; k < names.size(); ++k) out.push_back(fit_rate(names[k], series[k]));
  return out;
}

ResidualReport identity_suite(int n, const PipelineOptions& opts) {
  ResidualReport rep;
  const GridPtr g = make_grid(GridMode::radial1d, n);
  const auto [hbar, h] = background_structures(g);
  const DefiningFunction rho(g);

  rep.checks.push_back(check_max("H flat cancellation (radial)", sup_norm(H_tensor(hbar, rho), false), 1e-11));
  {
    const ScalarField a = A_scalar(hbar, rho);
    double e = 0.0;
    for (Index k = 0; k < g->size(); ++k) e = std::max(e, std::abs(a[k] + 2.0 * g->x(k).squaredNorm()));
    rep.checks.push_back(check_max("A flat oracle -2r^2", e, 1e-11));
  }
  rep.checks.push_back(check_max("chi-hat on the round sphere", shear_tensor(hbar).values.cwiseAbs().maxCoeff(), 1e-12));
  {
    const ScalarField theta = sample_scalar(g, [](const Vector3d& x) {
      const double r = DefiningFunction::value(x);
      return 1.0 + 0.25 * r * r;
    });
    rep.checks.push_back(check_max("chi-hat under radial conformal factor",
                                   shear_tensor(conformal_rescale(hbar, theta, 4.0)).values.cwiseAbs().maxCoeff(), 1e-10));
  }
  {
    const ScalarField r = scalar_curvature(h);
    double e = 0.0;
    for (Index k : g->interior_nodes()) e = std::max(e, std::abs(r[k] + 6.0));
    rep.checks.push_back(check_max("R[h] = -6", e, 1e-10));
  }
  {
    const LichCoefficients c{ScalarField(g), ScalarField(g), scalar_curvature(h)};
    auto [phi, nrep] = solve_lichnerowicz(h, c, opts.newton);
    double e = 0.0;
    for (Index k : g->interior_nodes()) e = std::max(e, std::abs(phi[k] - 1.0));
    rep.checks.push_back(check_max("Lichnerowicz on h gives phi = 1", e, 1e-10));
  }
  {
    auto [seed, srep] = project_free_to_seed(make_free_data(g, PresetParams{}), PipelineMode::shearfree, opts);
    rep.checks.push_back(check_max("Xi(h, 0, 0) has sigma = 0", sup_norm(seed.sigma_bar), 1e-10));
  }

  // 𝓗 on a 3D patch with an anisotropic metric
  {
    const GridPtr p = Grid::patch(n, covariance_center(), 3);
    const Metric lam = preset_metric(p, covariance_metric()).as_compactified();
    const DefiningFunction rp(p);
    const SymTensor2Field hm = H_tensor(lam, rp);
    const VectorField grad = gradient(lam, rp.rho());
    double tr = 0.0, tv = 0.0, scale = 0.0;
    for (Index k = 0; k < p->size(); ++k) {
      const Matrix3d m = hm.mat(k);
      scale = std::max(scale, m.norm());
      tr = std::max(tr, std::abs(lam.inverse_bar().mat(k).cwiseProduct(m).sum()));
      tv = std::max(tv, (m * grad.vec(k)).norm() / std::max(grad.vec(k).norm(), 1e-300));
    }
    rep.checks.push_back(check_max("H trace-free (relative)", tr / scale, 1e-11));
    rep.checks.push_back(check_max("H transverse (relative)", tv / scale, 1e-11));
    for (double c : {2.0, 0.5, 10.0}) {
      const SymTensor2Field hc = H_tensor(lam, DefiningFunction(p, c));
      double e = 0.0;
      const double c5 = std::pow(c, 5.0);
      for (Index k = 0; k < p->size(); ++k) e = std::max(e, (hc.mat(k) - c5 * hm.mat(k)).norm());
      rep.checks.push_back(check_max("H scaling c^5, c = " + std::to_string(c).substr(0, 4), e / (c5 * scale), 1e-12));
    }
    const auto [pbar, pphys] = background_structures(p);
    rep.checks.push_back(check_max("H flat cancellation (patch)", sup_norm(H_tensor(pbar, rp), false), 1e-11));
  }
  for (const auto& r : convergence_study("h-covariance", {256, 512, 1024}, PresetParams{}, PipelineMode::shearfree,
                                         GridMode::ball3d, opts)) {
    rep.studies.push_back(r);
    rep.checks.push_back(check_min(r.name + " rate", r.rate, 1.8));
  }

  // Div_{φ⁴λ}(φ⁻²T) = φ⁻⁶ Div_λ T for trace-free T
  {
    std::vector<StudyRow> rows;
    for (int m : {n / 4, n / 2, n}) {
      const GridPtr gm = make_grid(GridMode::radial1d, m);
      PresetParams pp;
      pp.metric = "perturbed";
      pp.metric_epsilon = 0.3;
      const Metric lam = preset_metric(gm, pp);
      const ScalarField phi = sample_scalar(gm, [](const Vector3d& x) { return 1.0 + 0.2 * DefiningFunction::value(x); });
      SymTensor2Field t = sample_tensor(gm, [](const Vector3d& x) { return Matrix3d(DefiningFunction::value(x) * x * x.transpose()); });
      t = trace_free_part(lam, t);
      ScalarField pm2 = phi, pm6 = phi;
      pm2.data() = phi.data().array().pow(-2.0).matrix();
      pm6.data() = phi.data().array().pow(-6.0).matrix();
      const CovectorField lhs = divergence(conformal_rescale(lam, phi, 4.0), pm2 * t);
      const CovectorField rhs = pm6 * divergence(lam, t);
      double e = 0.0;
      for (Index k : gm->interior_nodes()) e = std::max(e, (lhs.vec(k) - rhs.vec(k)).norm());
      rows.push_back({m, gm->h(), e});
    }
    const ConvergenceResult r = fit_rate("divergence conformal covariance", rows);
    rep.studies.push_back(r);
    rep.checks.push_back(check_min(r.name + " rate", r.rate, 1.8));
  }

  // gauge equivalence of the full pipeline
  {
    PresetParams pp;
    pp.metric = "perturbed";
    pp.metric_epsilon = 0.3;
    pp.nu = "decaying";
    pp.nu_amplitude = 0.5;
    pp.matter = "maxwell-fluid";
    pp.e_amplitude = 0.3;
    pp.j_amplitude = 0.2;
    pp.zeta_amplitude = 0.1;
    pp.theta_amplitude = 0.5;
    for (const auto& r : convergence_study("gauge", {n / 4, n / 2, n}, pp, PipelineMode::shearfree, GridMode::radial1d, opts)) {
      rep.studies.push_back(r);
      if (r.saturated)
        rep.checks.push_back(check_max(r.name + " (saturated)", r.rows.back().error, 1e-10));
      else
        rep.checks.push_back(check_min(r.name + " rate", r.rate, 1.8));
    }
  }
  return rep;
}

PerturbationProbe perturbation_probe(const FreeData& free, PipelineMode mode, const std::vector<double>& epsilons,
                                     const PipelineOptions& opts) {
  const GridPtr& gp = free.lambda.grid();
  const Grid& grid = *gp;
  auto base_seed = project_free_to_seed(free, mode, opts).first;
  const InitialData base = seed_to_data(base_seed, opts).first;
  const Metric lbar = free.lambda.as_compactified();
  SymTensor2Field dnu = sample_tensor(gp, [](const Vector3d& x) {
    return Matrix3d(DefiningFunction::value(x) * x * x.transpose());
  });
  dnu = trace_free_part(lbar, dnu);
  const double dn = std::max(sup_norm(dnu), 1e-300);
  dnu *= 1.0 / dn;
  const ScalarField dz = sample_scalar(gp, [](const Vector3d& x) {
    const double r = DefiningFunction::value(x);
    return 4.0 * r * r;
  });
  PerturbationProbe out;
  out.epsilons = epsilons;
  for (double eps : epsilons) {
    FreeData f = free;
    f.nu_bar += eps * dnu;
    f.matter.zeta += eps * dz;
    const InitialData d = seed_to_data(project_free_to_seed(f, mode, opts).first, opts).first;
    const double diff = std::max({sup_diff(grid, d.g.bar().data(), base.g.bar().data()),
                                  sup_diff(grid, d.sigma_bar.data(), base.sigma_bar.data()),
                                  sup_diff(grid, d.phi.data(), base.phi.data())});
    out.ratios.push_back(diff / eps);
  }
  const auto [lo, hi] = std::minmax_element(out.ratios.begin(), out.ratios.end());
  out.spread = out.ratios.empty() ? 0.0 : *hi / std::max(*lo, 1e-300);
  return out;
}

ConstraintResiduals inject_phi_fault(const SeedData& seed, const InitialData& data, double epsilon) {
  ScalarField phi = data.phi;
  const Grid& grid = *phi.grid();
  for (Index n : grid.interior_nodes()) {
    const double r = rho_at(grid, n);
    phi[n] *= 1.0 + epsilon * 4.0 * r * (1.0 - r);
  }
  return constraint_residuals(rebuild(seed, phi));
}

ConstraintResiduals inject_sigma_fault(const InitialData& data, double epsilon) {
  InitialData d = data;
  const GridPtr& gp = d.g.grid();
  SymTensor2Field dt = sample_tensor(gp, [](const Vector3d& x) { return Matrix3d(DefiningFunction::value(x) * x * x.transpose()); });
  dt = trace_free_part(d.g.as_compactified(), dt);
  d.sigma_bar += epsilon * dt;
  return constraint_residuals(d);
}

ConstraintResiduals inject_e_fault(const InitialData& data, double epsilon) {
  InitialData d = data;
  const GridPtr& gp = d.g.grid();
  d.matter.e += sample_vector(gp, [epsilon](const Vector3d& x) {
    const double r = DefiningFunction::value(x);
    return Vector3d(epsilon * r * r * x);
  });
  return constraint_residuals(d);
}

}  // namespace hyp

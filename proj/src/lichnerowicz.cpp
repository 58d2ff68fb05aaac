#include "hyperboloidal/lichnerowicz.hpp"

#include <cmath>

#include "hyperboloidal/tensor_ops.hpp"

namespace hyp {

namespace {

constexpr double kNegativity = 1e-13;

double sup_interior(const Grid& grid, const ScalarField& f) {
  double s = 0.0;
  for (Index n : grid.interior_nodes()) s = std::max(s, std::abs(f[n]));
  return s;
}

double row_scale(const Metric& g, Index n) {
  if (!g.physical()) return 1.0;
  const double rho = DefiningFunction::value(g.grid()->x(n));
  return 1.0 / (rho * rho);
}

// Residual with the Laplacian taken of ψ = φ - 1 so that roundoff scales with |ψ|.
ScalarField residual_psi(const Metric& lambda, const LichCoefficients& c, const ScalarField& psi) {
  const ScalarField lap = laplacian(lambda, psi);
  ScalarField out(psi.grid());
  for (Index n : psi.grid()->interior_nodes()) {
    const double p = 1.0 + psi[n];
    const double p2 = p * p, p4 = p2 * p2;
    out[n] = lap[n] - 0.125 * c.R[n] * p + c.A[n] / (p4 * p2 * p) + c.B[n] / (p2 * p) - 0.75 * p4 * p;
  }
  return out;
}

}  // namespace

std::vector<double> NewtonReport::order_estimates(double floor) const {
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < residual_history.size(); ++k) {
    if (damping_history[k - 1] != 1.0 || damping_history[k] != 1.0) continue;
    const double r0 = residual_history[k - 1], r1 = residual_history[k], r2 = residual_history[k + 1];
    if (r2 < floor || r1 >= r0) continue;
    out.push_back(std::log(r2 / r1) / std::log(r1 / r0));
  }
  return out;
}

LichCoefficients assemble_coefficients(const SeedData& seed) {
  const Metric& lambda = seed.lambda;
  const GridPtr& gp = lambda.grid();
  const Grid& grid = *gp;
  if (seed.sigma_bar.grid() != gp || seed.psi.e.grid() != gp || seed.psi.b.grid() != gp ||
      seed.psi.zeta.grid() != gp)
    throw FrameError("seed fields live on different grids");
  if (!lambda.physical()) throw FrameError("seed metric must carry the physical tag");
  LichCoefficients c{ScalarField(gp), ScalarField(gp), scalar_curvature(lambda)};
  for (Index n : grid.interior_nodes()) {
    const double zeta = seed.psi.zeta[n];
    if (zeta < -kNegativity) throw DomainError("negative ζ in seed data");
    const double rho = DefiningFunction::value(grid.x(n));
    const Matrix3d inv = lambda.inverse_bar().mat(n);
    const Matrix3d lb = lambda.bar().mat(n);
    const Matrix3d s = seed.sigma_bar.mat(n);
    // |σ|²_λ = ρ²|σ̄|²_λ̄ and |𝓔|²_λ = ρ⁻² λ̄(𝓔, 𝓔)
    c.A[n] = 0.125 * rho * rho * (inv * s * inv * s.transpose()).trace();
    const Vector3d e = seed.psi.e.vec(n), b = seed.psi.b.vec(n);
    c.B[n] = 0.125 * ((e.dot(lb * e) + b.dot(lb * b)) / (rho * rho) + 2.0 * std::max(zeta, 0.0));
  }
  return c;
}

ScalarField lichnerowicz_residual(const Metric& lambda, const LichCoefficients& c, const ScalarField& phi) {
  const ScalarField lap = laplacian(lambda, phi);
  ScalarField out(phi.grid());
  for (Index n : phi.grid()->interior_nodes()) {
    const double p = phi[n];
    const double p2 = p * p, p4 = p2 * p2;
    out[n] = lap[n] - 0.125 * c.R[n] * p + c.A[n] / (p4 * p2 * p) + c.B[n] / (p2 * p) - 0.75 * p4 * p;
  }
  return out;
}

std::pair<ScalarField, NewtonReport> solve_lichnerowicz(const Metric& lambda, const LichCoefficients& c,
                                                        const NewtonOptions& opts) {
  const GridPtr& gp = lambda.grid();
  const Grid& grid = *gp;
  const auto& nodes = grid.interior_nodes();
  for (Index n : nodes)
    if (c.A[n] < -kNegativity || c.B[n] < -kNegativity) throw DomainError("Lichnerowicz coefficients must be non-negative");

  auto field_of = [&](const Eigen::VectorXd& v) {
    ScalarField u(gp);
    for (std::size_t k = 0; k < nodes.size(); ++k) u[nodes[k]] = v[static_cast<Index>(k)];
    return u;
  };
  Eigen::VectorXd scale(static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) scale[static_cast<Index>(k)] = row_scale(lambda, nodes[k]);

  LinearSystem lap;
  lap.nodes = nodes;
  lap.components = {0};
  lap.parity_at_origin = grid.mode() == GridMode::radial1d;
  lap.matrix = probe_matrix(grid, nodes, 1, [&](const Eigen::VectorXd& v) {
    const ScalarField r = laplacian(lambda, field_of(v));
    Eigen::VectorXd out(v.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) out[static_cast<Index>(k)] = r[nodes[k]] * scale[static_cast<Index>(k)];
    return out;
  });

  NewtonReport report;
  ScalarField psi(gp);
  ScalarField res = residual_psi(lambda, c, psi);
  report.residual_history.push_back(sup_interior(grid, res));

  for (int it = 0;; ++it) {
    if (report.residual_history.back() <= opts.tolerance) {
      report.stop_reason = "residual";
      break;
    }
    if (it >= opts.max_iterations) {
      report.final_residual = report.residual_history.back();
      throw SolverError("Newton iteration did not converge in " + std::to_string(opts.max_iterations) + " iterations");
    }
    // Jacobian Δ + diag(-⅛R - 7Aφ⁻⁸ - 3Bφ⁻⁴ - 15/4 φ⁴)
    Eigen::VectorXd diag(static_cast<Index>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Index n = nodes[k];
      const double p = 1.0 + psi[n];
      const double p4 = p * p * p * p;
      const double d = -0.125 * c.R[n] - 7.0 * c.A[n] / (p4 * p4) - 3.0 * c.B[n] / p4 - 3.75 * p4;
      if (d > 0.0) throw SolverError("Newton Jacobian lost its sign structure (positive zeroth-order term)");
      diag[static_cast<Index>(k)] = d;
    }
    LinearSystem sys = lap;
    for (Index k = 0; k < diag.size(); ++k) sys.matrix.coeffRef(k, k) += diag[k] * scale[k];
    sys.rhs.resize(diag.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) sys.rhs[static_cast<Index>(k)] = -res[nodes[k]] * scale[static_cast<Index>(k)];
    LinearSolveReport lrep;
    const Eigen::VectorXd dv = solve_system(sys, grid, opts.linear, lrep);
    const ScalarField delta = field_of(dv);
    // independent check of the linear solve
    {
      const ScalarField ld = laplacian(lambda, delta);
      double r = 0.0, rn = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Index n = nodes[k];
        const Index kk = static_cast<Index>(k);
        r = std::max(r, std::abs((ld[n] + diag[kk] * delta[n] + res[n]) * scale[kk]));
        rn = std::max(rn, std::abs(res[n] * scale[kk]));
      }
      double anorm = 0.0;
      for (Index row = 0; row < sys.matrix.outerSize(); ++row) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator e(sys.matrix, row); e; ++e) s += std::abs(e.value());
        anorm = std::max(anorm, s);
      }
      const double denom = anorm * dv.cwiseAbs().maxCoeff() + rn;
      lrep.verified_residual = denom > 0.0 ? r / denom : r;
      if (lrep.verified_residual > 10 * opts.linear.tolerance) throw SolverError("Newton step failed independent residual check");
    }
    report.max_linear_residual = std::max(report.max_linear_residual, lrep.verified_residual);

    const double step = dv.size() ? dv.cwiseAbs().maxCoeff() : 0.0;
    double alpha = 1.0;
    ScalarField trial(gp), trial_res(gp);
    bool accepted = false;
    for (int halving = 0; halving <= opts.max_halvings; ++halving, alpha *= 0.5) {
      trial = psi;
      for (Index n : nodes) trial[n] += alpha * delta[n];
      bool positive = true;
      for (Index n : nodes) positive = positive && 1.0 + trial[n] >= opts.positivity_floor;
      if (!positive) {
        ++report.floor_hits;
        continue;
      }
      trial_res = residual_psi(lambda, c, trial);
      const double r = sup_interior(grid, trial_res);
      if (std::isfinite(r) && (r < report.residual_history.back() || alpha * step <= opts.step_tolerance)) {
        accepted = true;
        report.residual_history.push_back(r);
        break;
      }
    }
    if (!accepted) {
      report.final_residual = report.residual_history.back();
      throw SolverError("Newton line search failed after " + std::to_string(opts.max_halvings) + " halvings");
    }
    psi = trial;
    res = trial_res;
    report.damping_history.push_back(alpha);
    report.step_history.push_back(alpha * step);
    report.iterations = it + 1;
    if (report.residual_history.back() <= opts.tolerance) {
      report.stop_reason = "residual";
      break;
    }
    if (alpha * step <= opts.step_tolerance) {
      report.stop_reason = "step";
      break;
    }
  }
  report.final_residual = report.residual_history.back();
  ScalarField phi = psi;
  phi.data().array() += 1.0;
  return {phi, report};
}

ScalarField manufactured_target(const GridPtr& grid, double epsilon) {
  return sample_scalar(grid, [epsilon](const Vector3d& x) {
    const double rho = DefiningFunction::value(x);
    return rho <= 0.0 ? 1.0 : 1.0 + epsilon * std::sin(M_PI * rho);
  });
}

LichCoefficients manufactured_source(const Metric& lambda, const ScalarField& phi_star) {
  const GridPtr& gp = phi_star.grid();
  const Grid& grid = *gp;
  for (Index n : grid.interior_nodes())
    if (!(phi_star[n] > 0.0)) throw DomainError("manufactured φ* must be positive");
  for (Index n : grid.boundary_nodes())
    if (grid.mode() == GridMode::radial1d && std::abs(phi_star[n] - 1.0) > 1e-12)
      throw DomainError("manufactured φ* must equal 1 on the boundary");
  LichCoefficients c{ScalarField(gp), ScalarField(gp), scalar_curvature(lambda)};
  ScalarField psi = phi_star;
  psi.data().array() -= 1.0;
  const ScalarField lap = laplacian(lambda, psi, 4);
  for (Index n : grid.interior_nodes()) {
    const double p = phi_star[n];
    const double p4 = p * p * p * p;
    const double b = p * p * p * (0.75 * p4 * p + 0.125 * c.R[n] * p - lap[n]);
    if (b < -kNegativity) throw DomainError("manufactured source is negative; reduce the amplitude");
    c.B[n] = std::max(b, 0.0);
  }
  return c;
}

}  // namespace hyp

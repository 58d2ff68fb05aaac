#include "hyperboloidal/elliptic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <cmath>
#include <map>

#include "hyperboloidal/tensor_ops.hpp"

namespace hyp {

namespace {

int colour(const Grid& grid, Index node) {
  if (grid.mode() == GridMode::radial1d) return static_cast<int>(node % 3);
  const auto ijk = grid.lattice(node);
  return ((ijk[0] + grid.origin()[0]) % 3) * 9 + ((ijk[1] + grid.origin()[1]) % 3) * 3 +
         (ijk[2] + grid.origin()[2]) % 3;
}

// Nodes whose values can enter the stencil of `node`.
std::vector<Index> neighbourhood(const Grid& grid, Index node) {
  std::vector<Index> out;
  if (grid.mode() == GridMode::radial1d) {
    for (Index m = node - 1; m <= node + 1; ++m)
      if (m >= 0 && m < grid.size()) out.push_back(m);
    return out;
  }
  const auto ijk = grid.lattice(node);
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj)
      for (int dk = -1; dk <= 1; ++dk) {
        const int i = ijk[0] + di, j = ijk[1] + dj, k = ijk[2] + dk;
        if (i < 0 || j < 0 || k < 0 || i >= grid.extent()[0] || j >= grid.extent()[1] || k >= grid.extent()[2]) continue;
        out.push_back(grid.node(i, j, k));
      }
  return out;
}

double row_scale(const Metric& g, Index node) {
  if (!g.physical()) return 1.0;
  const double rho = DefiningFunction::value(g.grid()->x(node));
  return 1.0 / (rho * rho);
}

double inf_norm(const Eigen::SparseMatrix<double, Eigen::RowMajor>& a) {
  double out = 0.0;
  for (Index r = 0; r < a.outerSize(); ++r) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    out = std::max(out, s);
  }
  return out;
}

double backward_error(double res, double anorm, double unorm, double fnorm) {
  const double denom = anorm * unorm + fnorm;
  return denom > 0.0 ? res / denom : res;
}

}  // namespace

Eigen::SparseMatrix<double, Eigen::RowMajor> probe_matrix(const Grid& grid, const std::vector<Index>& nodes,
                                                          int components, const LinearApply& apply) {
  const Index nu = static_cast<Index>(nodes.size()) * components;
  std::vector<Index> slot(grid.size(), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) slot[nodes[k]] = static_cast<Index>(k);
  std::map<int, std::vector<Index>> by_colour;
  for (std::size_t k = 0; k < nodes.size(); ++k) by_colour[colour(grid, nodes[k])].push_back(static_cast<Index>(k));
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& [col, members] : by_colour) {
    for (int c = 0; c < components; ++c) {
      Eigen::VectorXd probe = Eigen::VectorXd::Zero(nu);
      for (Index k : members) probe[k * components + c] = 1.0;
      const Eigen::VectorXd out = apply(probe);
      for (std::size_t row = 0; row < nodes.size(); ++row) {
        Index source = -1;
        for (Index m : neighbourhood(grid, nodes[row]))
          if (slot[m] >= 0 && colour(grid, m) == col) source = slot[m];
        if (source < 0) continue;
        for (int rc = 0; rc < components; ++rc) {
          const double v = out[static_cast<Index>(row) * components + rc];
          if (v != 0.0) trips.emplace_back(static_cast<Index>(row) * components + rc, source * components + c, v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(nu, nu);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

Eigen::VectorXd solve_system(const LinearSystem& sys, const Grid& grid, const SolverOptions& opts,
                             LinearSolveReport& report, const Eigen::VectorXd* guess) {
  report.tolerance = opts.tolerance;
  Eigen::VectorXd x;
  const Eigen::SparseMatrix<double> a = sys.matrix;
  if (grid.mode() == GridMode::radial1d) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed (singular system)");
    x = lu.solve(sys.rhs);
    report.solver = "sparse-lu";
    report.iterations = 0;
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-3);
    it.preconditioner().setFillfactor(10);
    it.setTolerance(opts.tolerance);
    it.setMaxIterations(opts.max_iterations > 0 ? opts.max_iterations : 10 * grid.n());
    it.compute(a);
    if (it.info() != Eigen::Success) throw SolverError("incomplete factorization failed");
    if (guess)
      x = it.solveWithGuess(sys.rhs, *guess);
    else
      x = it.solve(sys.rhs);
    report.solver = "bicgstab-ilut";
    report.iterations = static_cast<int>(it.iterations());
    if (it.info() != Eigen::Success && it.error() > 10 * opts.tolerance)
      throw SolverError("iterative solver stagnated at relative residual " + std::to_string(it.error()));
  }
  const double res = (sys.matrix * x - sys.rhs).cwiseAbs().maxCoeff();
  report.residual = backward_error(res, inf_norm(sys.matrix), x.cwiseAbs().maxCoeff(), sys.rhs.cwiseAbs().maxCoeff());
  if (!std::isfinite(report.residual) || report.residual > 10 * opts.tolerance)
    throw SolverError("linear solve residual " + std::to_string(report.residual) + " above tolerance");
  return x;
}

std::pair<ScalarField, LinearSolveReport> solve_scalar(const Metric& lambda, double c, const ScalarField& kappa,
                                                       const ScalarField& f, double delta_weight,
                                                       const SolverOptions& opts) {
  if (!(c > -1.0)) throw WeightWindowError("perturbed Poisson problem needs c > -1");
  if (!(std::abs(delta_weight - 1.0) < std::sqrt(1.0 + c)))
    throw WeightWindowError("weight " + std::to_string(delta_weight) + " outside the window |δ-1| < √(1+c)");
  const GridPtr& gp = lambda.grid();
  const Grid& grid = *gp;
  for (Index n : grid.interior_nodes())
    if (c - kappa[n] < 0.0) throw DomainError("c - κ must be non-negative");
  const auto& nodes = grid.interior_nodes();
  auto field_of = [&](const Eigen::VectorXd& v) {
    ScalarField u(gp);
    for (std::size_t k = 0; k < nodes.size(); ++k) u[nodes[k]] = v[static_cast<Index>(k)];
    return u;
  };
  auto apply_field = [&](const ScalarField& u) {
    const ScalarField lu = laplacian(lambda, u);
    ScalarField out(gp);
    for (Index n : nodes) out[n] = lu[n] + (kappa[n] - c) * u[n];
    return out;
  };
  LinearSystem sys;
  sys.nodes = nodes;
  sys.components = {0};
  sys.parity_at_origin = grid.mode() == GridMode::radial1d;
  sys.matrix = probe_matrix(grid, nodes, 1, [&](const Eigen::VectorXd& v) {
    const ScalarField r = apply_field(field_of(v));
    Eigen::VectorXd out(static_cast<Index>(nodes.size()));
    for (std::size_t k = 0; k < nodes.size(); ++k) out[static_cast<Index>(k)] = r[nodes[k]] * row_scale(lambda, nodes[k]);
    return out;
  });
  sys.rhs.resize(static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) sys.rhs[static_cast<Index>(k)] = f[nodes[k]] * row_scale(lambda, nodes[k]);
  LinearSolveReport report;
  const Eigen::VectorXd x = solve_system(sys, grid, opts, report);
  ScalarField u = field_of(x);
  // independent re-check with the tensor_ops operator
  const ScalarField check = apply_field(u);
  double res = 0.0;
  for (Index n : nodes) res = std::max(res, std::abs(check[n] - f[n]) * row_scale(lambda, n));
  report.verified_residual = backward_error(res, inf_norm(sys.matrix), x.cwiseAbs().maxCoeff(), sys.rhs.cwiseAbs().maxCoeff());
  if (report.verified_residual > 10 * opts.tolerance) throw SolverError("scalar solve failed independent residual check");
  return {u, report};
}

HelmholtzSplit helmholtz_split(const Metric& lambda, const VectorField& x, const SolverOptions& opts) {
  const ScalarField div = divergence(lambda, x);
  const ScalarField zero(lambda.grid());
  auto [u, report] = solve_scalar(lambda, 0.0, zero, div, 1.0, opts);
  VectorField y = x - gradient(lambda, u);
  return {u, y, report};
}

namespace {

struct VectorLayout {
  std::vector<Index> nodes;
  int components = 3;
};

VectorLayout vector_layout(const Grid& grid) {
  VectorLayout l;
  if (grid.mode() == GridMode::radial1d) {
    for (Index n : grid.interior_nodes())
      if (n > 0) l.nodes.push_back(n);
    l.components = 1;
  } else {
    l.nodes = grid.interior_nodes();
  }
  return l;
}

VectorField vector_of(const GridPtr& gp, const VectorLayout& l, const Eigen::VectorXd& v) {
  VectorField w(gp);
  for (std::size_t k = 0; k < l.nodes.size(); ++k)
    for (int c = 0; c < l.components; ++c) w.node(l.nodes[k])(c) = v[static_cast<Index>(k) * l.components + c];
  return w;
}

Eigen::VectorXd rows_of(const Metric& g, const VectorLayout& l, const VectorField& f) {
  Eigen::VectorXd out(static_cast<Index>(l.nodes.size()) * l.components);
  for (std::size_t k = 0; k < l.nodes.size(); ++k)
    for (int c = 0; c < l.components; ++c)
      out[static_cast<Index>(k) * l.components + c] = f.node(l.nodes[k])(c) * row_scale(g, l.nodes[k]);
  return out;
}

}  // namespace

LinearSystem assemble_vector_laplacian(const Metric& lambda, const VectorField& y) {
  const Grid& grid = *lambda.grid();
  const VectorLayout l = vector_layout(grid);
  LinearSystem sys;
  sys.nodes = l.nodes;
  for (int c = 0; c < l.components; ++c) sys.components.push_back(c);
  sys.parity_at_origin = grid.mode() == GridMode::radial1d;
  sys.matrix = probe_matrix(grid, l.nodes, l.components, [&](const Eigen::VectorXd& v) {
    return rows_of(lambda, l, vector_laplacian_apply(lambda, vector_of(lambda.grid(), l, v)));
  });
  sys.rhs = rows_of(lambda, l, y);
  return sys;
}

std::pair<VectorField, LinearSolveReport> solve_vector_laplacian(const Metric& lambda, const VectorField& y,
                                                                 const SolverOptions& opts, const VectorField* guess,
                                                                 double delta_weight) {
  if (!(delta_weight > -1.0 && delta_weight < 3.0))
    throw WeightWindowError("vector Laplacian weight must lie in the open window (-1, 3)");
  const Grid& grid = *lambda.grid();
  const VectorLayout l = vector_layout(grid);
  const LinearSystem sys = assemble_vector_laplacian(lambda, y);
  LinearSolveReport report;
  Eigen::VectorXd x0;
  if (guess) {
    x0.resize(sys.unknowns());
    for (std::size_t k = 0; k < l.nodes.size(); ++k)
      for (int c = 0; c < l.components; ++c) x0[static_cast<Index>(k) * l.components + c] = guess->node(l.nodes[k])(c);
  }
  const Eigen::VectorXd x = solve_system(sys, grid, opts, report, guess ? &x0 : nullptr);
  VectorField w = vector_of(lambda.grid(), l, x);
  const Eigen::VectorXd check =
      rows_of(lambda, l, vector_laplacian_apply(lambda, w)) - sys.rhs;
  report.verified_residual = backward_error(check.cwiseAbs().maxCoeff(), inf_norm(sys.matrix), x.cwiseAbs().maxCoeff(),
                                            sys.rhs.cwiseAbs().maxCoeff());
  if (report.verified_residual > 10 * opts.tolerance) throw SolverError("vector solve failed independent residual check");
  return {w, report};
}

std::pair<VectorField, LinearSolveReport> solve_reduced_vector_laplacian(const Metric& lambda, const VectorField& y,
                                                                         int power, const SolverOptions& opts) {
  const GridPtr& gp = lambda.grid();
  const Grid& grid = *gp;
  if (grid.mode() != GridMode::radial1d || !lambda.physical())
    throw FrameError("the reduced vector solve needs a radial physical metric");
  const Index n = grid.size();
  if (n < 5) throw DomainError("the reduced vector solve needs at least five nodes");
  LinearSystem sys;
  for (Index i = 1; i < n; ++i) sys.nodes.push_back(i);
  sys.components = {0};
  sys.parity_at_origin = true;
  auto field_of = [&](const Eigen::VectorXd& v) {
    VectorField u(gp);
    for (Index i = 1; i < n; ++i) u.node(i)(0) = v[i - 1];
    return u;
  };
  auto rows = [&](const VectorField& f) {
    Eigen::VectorXd out(n - 1);
    for (Index i = 1; i < n; ++i) out[i - 1] = f.node(i)(0);
    return out;
  };
  sys.matrix = probe_matrix(grid, sys.nodes, 1,
                            [&](const Eigen::VectorXd& v) { return rows(reduced_vector_laplacian(lambda, field_of(v), power)); });
  sys.rhs.resize(n - 1);
  for (Index i = 1; i < n - 1; ++i) sys.rhs[i - 1] = y.node(i)(0) / std::pow(DefiningFunction::value(grid.x(i)), power);
  // quadratic extrapolation of ρ⁻ᵖY onto ∂M
  sys.rhs[n - 2] = 3.0 * sys.rhs[n - 3] - 3.0 * sys.rhs[n - 4] + sys.rhs[n - 5];
  LinearSolveReport report;
  const Eigen::VectorXd x = solve_system(sys, grid, opts, report);
  VectorField u = field_of(x);
  const Eigen::VectorXd check = rows(reduced_vector_laplacian(lambda, u, power)) - sys.rhs;
  report.verified_residual = backward_error(check.cwiseAbs().maxCoeff(), inf_norm(sys.matrix), x.cwiseAbs().maxCoeff(),
                                            sys.rhs.cwiseAbs().maxCoeff());
  if (report.verified_residual > 10 * opts.tolerance) throw SolverError("vector solve failed independent residual check");
  return {u, report};
}

}  // namespace hyp

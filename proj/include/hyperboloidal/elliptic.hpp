#pragma once

#include <Eigen/SparseCore>
#include <functional>
#include <string>

#include "hyperboloidal/geometry.hpp"

namespace hyp {

/// Unknowns are (node, component) pairs on interior nodes; boundary nodes carry
/// homogeneous Dirichlet data and the origin is handled by parity inside the stencils.
struct LinearSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd rhs;
  std::vector<Index> nodes;
  std::vector<int> components;
  double dirichlet_value = 0.0;
  bool parity_at_origin = false;

  Index unknowns() const { return static_cast<Index>(nodes.size() * components.size()); }
};

struct LinearSolveReport {
  std::string solver;
  int iterations = 0;
  double tolerance = 0.0;
  double residual = 0.0;           ///< backward error of the assembled system
  double verified_residual = 0.0;  ///< same, from an independent operator application
};

struct SolverOptions {
  double tolerance = 1e-12;
  int max_iterations = 0;  ///< 0 selects 10·N
};

using LinearApply = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Sparse matrix of a linear map on the unknowns by coloured probing.
Eigen::SparseMatrix<double, Eigen::RowMajor> probe_matrix(const Grid& grid, const std::vector<Index>& nodes,
                                                          int components, const LinearApply& apply);

/// Solves the assembled system; returns the unknown vector and fills the report.
Eigen::VectorXd solve_system(const LinearSystem& sys, const Grid& grid, const SolverOptions& opts,
                             LinearSolveReport& report, const Eigen::VectorXd* guess = nullptr);

/// Δ_λ u + (κ - c) u = f, u = 0 on ∂M, for u in the weighted class C_δ.
std::pair<ScalarField, LinearSolveReport> solve_scalar(const Metric& lambda, double c, const ScalarField& kappa,
                                                       const ScalarField& f, double delta_weight,
                                                       const SolverOptions& opts = {});

struct HelmholtzSplit {
  ScalarField u;
  VectorField y;
  LinearSolveReport report;
};

/// X = grad_λ u + Y with Div_λ Y = 0.
HelmholtzSplit helmholtz_split(const Metric& lambda, const VectorField& x, const SolverOptions& opts = {});

/// L_λ W = Y with W = 0 on ∂M, for W in C_δ (δ = 2 by default; window (-1, 3)).
std::pair<VectorField, LinearSolveReport> solve_vector_laplacian(const Metric& lambda, const VectorField& y,
                                                                 const SolverOptions& opts = {},
                                                                 const VectorField* guess = nullptr,
                                                                 double delta_weight = 2.0);

/// The assembled vector-Laplacian system (interior unknowns, ρ⁻²-scaled rows).
LinearSystem assemble_vector_laplacian(const Metric& lambda, const VectorField& y);

/// Radial only: U with L_λ(ρᵖU) = Y, for sources with ρ⁻ᵖY bounded. U is regular up to
/// and including ∂M, where it solves the indicial equation.
std::pair<VectorField, LinearSolveReport> solve_reduced_vector_laplacian(const Metric& lambda, const VectorField& y,
                                                                         int power, const SolverOptions& opts = {});

}  // namespace hyp

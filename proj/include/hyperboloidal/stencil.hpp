#pragma once

#include <vector>

#include "hyperboloidal/field.hpp"

namespace hyp {

/// Finite-difference weights for the m-th derivative at z from samples at x (Fornberg).
std::vector<double> fd_weights(double z, const std::vector<double>& x, int m);

/// One stencil entry: sample at node `index` along a line, optionally mirrored through
/// the origin (radial parity: T(-r) = R_π T(r)).
struct StencilEntry {
  int index;
  double weight;
  bool mirrored;
};

/// Stencil for derivative `deriv` at position i of a line with `len` points and unit
/// spacing. Centred where possible, one-sided near the ends; with `parity_left` points
/// beyond the left end are mirrored instead.
std::vector<StencilEntry> line_stencil(int len, int i, int deriv, int order, bool parity_left);

/// First partial derivatives ∂_k T, with the new index in the first slot.
/// order 2 (default) or 4.
template <int R>
Field<R + 1> d1(const Field<R>& f, int order = 2);

/// Second partial derivatives ∂_k ∂_l T (new indices first). Diagonal entries use compact
/// three-point second differences.
template <int R>
Field<R + 2> d2(const Field<R>& f, int order = 2);

/// Generator of rotations taking e_from to e_to, acting on every slot of a rank-R tensor.
Eigen::MatrixXd rotation_generator(int rank, int from, int to);
/// Rotation by π about e_z acting on a rank-R tensor.
Eigen::MatrixXd half_turn(int rank);

}  // namespace hyp

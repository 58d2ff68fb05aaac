#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace hyp {

using Index = Eigen::Index;

enum class GridMode { radial1d, ball3d };

enum class NodeKind : std::uint8_t { interior, boundary, exterior };

/// Uniform lattice on the closed unit ball.
///
/// radial1d: nodes x_i = (r_i, 0, 0), r_i = i/(N-1); the origin and r = 1 are nodes.
/// ball3d:   the cube lattice over [-1,1]^3 with N points per axis. Nodes with |x| < 1 - h/2
///           are interior; non-interior nodes in the 27-neighbourhood of an interior node are
///           boundary nodes and carry the Dirichlet data; the rest are exterior.
///           A patch is a sub-box of that lattice.
class Grid {
 public:
  static std::shared_ptr<const Grid> radial(int n);
  static std::shared_ptr<const Grid> ball(int n);
  static std::shared_ptr<const Grid> patch(int n, const Eigen::Vector3d& center, int half_width);

  GridMode mode() const { return mode_; }
  int n() const { return n_; }
  double h() const { return h_; }
  Index size() const { return static_cast<Index>(kind_.size()); }
  bool is_patch() const { return patch_; }

  const Eigen::Vector3d& x(Index node) const { return coords_[node]; }
  double r(Index node) const { return coords_[node].norm(); }
  NodeKind kind(Index node) const { return kind_[node]; }
  bool interior(Index node) const { return kind_[node] == NodeKind::interior; }

  const std::vector<Index>& interior_nodes() const { return interior_; }
  const std::vector<Index>& boundary_nodes() const { return boundary_; }

  /// Stored box extent per axis and global lattice index of its first node.
  const std::array<int, 3>& extent() const { return extent_; }
  const std::array<int, 3>& origin() const { return origin_; }
  Index node(int i, int j, int k) const {
    return (static_cast<Index>(i) * extent_[1] + j) * extent_[2] + k;
  }
  std::array<int, 3> lattice(Index node) const;
  /// Neighbouring node along a box axis, or -1 outside the stored box.
  Index neighbor(Index node, int axis, int offset) const;

 private:
  Grid() = default;
  void classify();

  GridMode mode_ = GridMode::radial1d;
  int n_ = 0;
  double h_ = 0.0;
  bool patch_ = false;
  std::array<int, 3> extent_{0, 1, 1};
  std::array<int, 3> origin_{0, 0, 0};
  std::vector<Eigen::Vector3d> coords_;
  std::vector<NodeKind> kind_;
  std::vector<Index> interior_;
  std::vector<Index> boundary_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(GridMode mode, int n);

}  // namespace hyp

#include "hyperboloidal/grid.hpp"

#include <cmath>

#include "hyperboloidal/errors.hpp"

namespace hyp {

namespace {

// Lattice nodes closer than h/2 to the sphere are treated as boundary nodes.
bool inside(const Eigen::Vector3d& x, double h) { return x.norm() < 1.0 - 0.5 * h; }

}  // namespace

std::shared_ptr<const Grid> Grid::radial(int n) {
  if (n < 3) throw DomainError("grid needs N >= 3");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::radial1d;
  g->n_ = n;
  g->h_ = 1.0 / (n - 1);
  g->extent_ = {n, 1, 1};
  g->coords_.resize(n);
  g->kind_.resize(n, NodeKind::interior);
  for (int i = 0; i < n; ++i) g->coords_[i] = Eigen::Vector3d(i == n - 1 ? 1.0 : i * g->h_, 0.0, 0.0);
  g->kind_[n - 1] = NodeKind::boundary;
  for (int i = 0; i < n - 1; ++i) g->interior_.push_back(i);
  g->boundary_.push_back(n - 1);
  return g;
}

std::shared_ptr<const Grid> Grid::ball(int n) {
  if (n < 3) throw DomainError("grid needs N >= 3");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::ball3d;
  g->n_ = n;
  g->h_ = 2.0 / (n - 1);
  g->extent_ = {n, n, n};
  g->classify();
  return g;
}

std::shared_ptr<const Grid> Grid::patch(int n, const Eigen::Vector3d& center, int half_width) {
  if (n < 3) throw DomainError("grid needs N >= 3");
  if (half_width < 3) throw DomainError("patch half width must be at least 3");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::ball3d;
  g->n_ = n;
  g->h_ = 2.0 / (n - 1);
  g->patch_ = true;
  for (int a = 0; a < 3; ++a) {
    const int c = static_cast<int>(std::lround((center[a] + 1.0) / g->h_));
    const int lo = std::clamp(c - half_width, 0, n - 1);
    const int hi = std::clamp(c + half_width, 0, n - 1);
    g->origin_[a] = lo;
    g->extent_[a] = hi - lo + 1;
    if (g->extent_[a] < 5) throw DomainError("patch too thin for the stencils");
  }
  g->classify();
  return g;
}

void Grid::classify() {
  const Index total = static_cast<Index>(extent_[0]) * extent_[1] * extent_[2];
  coords_.resize(total);
  kind_.assign(total, NodeKind::exterior);
  auto position = [this](int gi, int gj, int gk) {
    return Eigen::Vector3d(-1.0 + gi * h_, -1.0 + gj * h_, -1.0 + gk * h_);
  };
  for (int i = 0; i < extent_[0]; ++i)
    for (int j = 0; j < extent_[1]; ++j)
      for (int k = 0; k < extent_[2]; ++k) {
        const int gi = origin_[0] + i, gj = origin_[1] + j, gk = origin_[2] + k;
        const Index id = node(i, j, k);
        // Lattice coordinates on the boundary planes are snapped so that ±1 is exact.
        Eigen::Vector3d x = position(gi, gj, gk);
        for (int a = 0; a < 3; ++a) {
          const int ga = a == 0 ? gi : a == 1 ? gj : gk;
          if (2 * ga == n_ - 1) x[a] = 0.0;
          if (ga == 0) x[a] = -1.0;
          if (ga == n_ - 1) x[a] = 1.0;
        }
        coords_[id] = x;
        if (inside(x, h_)) {
          kind_[id] = NodeKind::interior;
          continue;
        }
        bool near = false;
        for (int di = -1; di <= 1 && !near; ++di)
          for (int dj = -1; dj <= 1 && !near; ++dj)
            for (int dk = -1; dk <= 1 && !near; ++dk) near = inside(position(gi + di, gj + dj, gk + dk), h_);
        if (near) kind_[id] = NodeKind::boundary;
      }
  for (Index id = 0; id < total; ++id) {
    if (kind_[id] == NodeKind::interior) interior_.push_back(id);
    if (kind_[id] == NodeKind::boundary) boundary_.push_back(id);
  }
}

std::array<int, 3> Grid::lattice(Index id) const {
  const int k = static_cast<int>(id % extent_[2]);
  const Index rest = id / extent_[2];
  const int j = static_cast<int>(rest % extent_[1]);
  const int i = static_cast<int>(rest / extent_[1]);
  return {i, j, k};
}

Index Grid::neighbor(Index id, int axis, int offset) const {
  auto ijk = lattice(id);
  ijk[axis] += offset;
  if (ijk[axis] < 0 || ijk[axis] >= extent_[axis]) return -1;
  return node(ijk[0], ijk[1], ijk[2]);
}

GridPtr make_grid(GridMode mode, int n) {
  switch (mode) {
    case GridMode::radial1d: return Grid::radial(n);
    case GridMode::ball3d: return Grid::ball(n);
  }
  throw DomainError("unknown grid mode");
}

}  // namespace hyp

#pragma once

#include <Eigen/Core>

#include "hyperboloidal/errors.hpp"
#include "hyperboloidal/grid.hpp"

namespace hyp {

enum class Frame { compactified, physical };

/// Which nodes carry meaningful values. Operators with a ρ⁻¹ factor are evaluated on
/// interior nodes only; such fields cannot be differentiated.
enum class Support { all, interior };

constexpr int pow3(int k) { return k == 0 ? 1 : 3 * pow3(k - 1); }

/// Default weight r = p - q for a field of the given rank: scalars 0, vectors -1,
/// covariant 2-tensors +2.
constexpr int default_weight(int rank) { return rank == 0 ? 0 : rank == 1 ? -1 : rank; }

/// Tensor field of rank R on a Grid, stored as 3^R Cartesian components per node
/// (column-major, so a node's components are contiguous). Component index is
/// row-major over tensor slots: c = i_0 3^{R-1} + ... + i_{R-1}.
template <int R, typename Scalar = double>
class Field {
 public:
  static constexpr int kRank = R;
  static constexpr int kComponents = pow3(R);
  using Components = Eigen::Matrix<Scalar, kComponents, Eigen::Dynamic>;
  using NodeVector = Eigen::Matrix<Scalar, kComponents, 1>;

  Field() = default;
  explicit Field(GridPtr grid, Frame frame = Frame::compactified, int weight = default_weight(R))
      : grid_(std::move(grid)), frame_(frame), weight_(weight),
        data_(Components::Zero(kComponents, grid_->size())) {}

  const GridPtr& grid() const { return grid_; }
  Frame frame() const { return frame_; }
  int weight() const { return weight_; }
  Support support() const { return support_; }
  Index size() const { return data_.cols(); }

  Field& set_weight(int w) { weight_ = w; return *this; }
  Field& set_support(Support s) { support_ = s; return *this; }
  Field& set_frame(Frame f) { frame_ = f; return *this; }

  Components& data() { return data_; }
  const Components& data() const { return data_; }

  auto node(Index i) { return data_.col(i); }
  auto node(Index i) const { return data_.col(i); }

  /// Rank-2 node view as a 3x3 matrix (row = first slot).
  Eigen::Matrix<Scalar, 3, 3> mat(Index i) const requires(R == 2) {
    return Eigen::Map<const Eigen::Matrix<Scalar, 3, 3, Eigen::RowMajor>>(data_.col(i).data());
  }
  void set_mat(Index i, const Eigen::Matrix<Scalar, 3, 3>& m) requires(R == 2) {
    Eigen::Map<Eigen::Matrix<Scalar, 3, 3, Eigen::RowMajor>>(data_.col(i).data()) = m;
  }
  Eigen::Matrix<Scalar, 3, 1> vec(Index i) const requires(R == 1) { return data_.col(i); }
  Scalar operator[](Index i) const requires(R == 0) { return data_(0, i); }
  Scalar& operator[](Index i) requires(R == 0) { return data_(0, i); }

  /// Same grid, frame, weight and support, new data.
  Field like(Components d) const {
    Field out = *this;
    out.data_ = std::move(d);
    return out;
  }

  Field& operator+=(const Field& o) { check_same(o); data_ += o.data_; return *this; }
  Field& operator-=(const Field& o) { check_same(o); data_ -= o.data_; return *this; }
  Field& operator*=(Scalar s) { data_ *= s; return *this; }

  void check_same(const Field& o) const {
    if (grid_ != o.grid_) throw FrameError("fields live on different grids");
    if (frame_ != o.frame_) throw FrameError("fields carry different frame tags");
  }

 private:
  GridPtr grid_;
  Frame frame_ = Frame::compactified;
  int weight_ = default_weight(R);
  Support support_ = Support::all;
  Components data_;
};

template <int R, typename S>
Field<R, S> operator+(Field<R, S> a, const Field<R, S>& b) { return a += b; }
template <int R, typename S>
Field<R, S> operator-(Field<R, S> a, const Field<R, S>& b) { return a -= b; }
template <int R, typename S>
Field<R, S> operator*(S s, Field<R, S> a) { return a *= s; }

/// Pointwise product with a scalar field.
template <int R, typename S>
Field<R, S> operator*(const Field<0, S>& f, Field<R, S> a) {
  if (f.grid() != a.grid()) throw FrameError("fields live on different grids");
  a.data() = (a.data().array().rowwise() * f.data().array()).matrix();
  if (f.support() == Support::interior) a.set_support(Support::interior);
  return a;
}

using ScalarField = Field<0>;
using VectorField = Field<1>;
using CovectorField = Field<1>;
using SymTensor2Field = Field<2>;
using Rank3Field = Field<3>;
using Rank4Field = Field<4>;

inline CovectorField make_covector(GridPtr g) { return CovectorField(std::move(g), Frame::compactified, 1); }

/// Scalar field from a function of the node position.
template <typename F>
ScalarField sample_scalar(const GridPtr& g, F&& f) {
  ScalarField out(g);
  for (Index i = 0; i < g->size(); ++i) out[i] = f(g->x(i));
  return out;
}

template <typename F>
VectorField sample_vector(const GridPtr& g, F&& f) {
  VectorField out(g);
  for (Index i = 0; i < g->size(); ++i) out.node(i) = f(g->x(i));
  return out;
}

template <typename F>
SymTensor2Field sample_tensor(const GridPtr& g, F&& f) {
  SymTensor2Field out(g);
  for (Index i = 0; i < g->size(); ++i) out.set_mat(i, f(g->x(i)));
  return out;
}

}  // namespace hyp

#include "hyperboloidal/stencil.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include "hyperboloidal/parallel.hpp"

namespace hyp {

std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n + 1, m + 1);
  double c1 = 1.0;
  double c4 = x[0] - z;
  c(0, 0) = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c(i, m);
  return w;
}

std::vector<StencilEntry> line_stencil(int len, int i, int deriv, int order, bool parity_left) {
  const int half = order / 2;
  int lo = i - half;
  int hi = i + half;
  if (hi > len - 1) {
    const int npts = order + deriv;
    hi = len - 1;
    lo = hi - npts + 1;
  } else if (lo < 0 && !parity_left) {
    const int npts = order + deriv;
    lo = 0;
    hi = npts - 1;
  }
  std::vector<double> xs;
  for (int k = lo; k <= hi; ++k) xs.push_back(k);
  const auto w = fd_weights(i, xs, deriv);
  std::vector<StencilEntry> out;
  for (int k = lo; k <= hi; ++k) {
    const double wk = w[k - lo];
    if (wk == 0.0) continue;
    out.push_back(k < 0 ? StencilEntry{-k, wk, true} : StencilEntry{k, wk, false});
  }
  return out;
}

Eigen::MatrixXd rotation_generator(int rank, int from, int to) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(to, from) = 1.0;
  j(from, to) = -1.0;
  const int k = pow3(rank);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (int slot = 0; slot < rank; ++slot) {
    const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(pow3(slot), pow3(slot));
    const Eigen::MatrixXd right = Eigen::MatrixXd::Identity(pow3(rank - slot - 1), pow3(rank - slot - 1));
    out += Eigen::kroneckerProduct(Eigen::kroneckerProduct(left, Eigen::MatrixXd(j)).eval(), right).eval();
  }
  return out;
}

Eigen::MatrixXd half_turn(int rank) {
  const int k = pow3(rank);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (int c = 0; c < k; ++c) {
    int rem = c;
    double sign = 1.0;
    for (int slot = 0; slot < rank; ++slot) {
      if (rem % 3 != 2) sign = -sign;
      rem /= 3;
    }
    out(c, c) = sign;
  }
  return out;
}

namespace {

template <int R>
void check_differentiable(const Field<R>& f) {
  if (f.frame() != Frame::compactified) throw FrameError("derivatives act on coordinate components");
  if (f.support() != Support::all) throw FrameError("field is defined on interior nodes only");
}

using Mat = Eigen::MatrixXd;

// Derivative along one box axis for every line of the stored box.
Mat axis_derivative(const Grid& g, const Mat& src, int axis, int deriv, int order) {
  const int len = g.extent()[axis];
  Mat dst = Mat::Zero(src.rows(), src.cols());
  const double scale = std::pow(g.h(), -deriv);
  std::vector<std::vector<StencilEntry>> st(len);
  for (int i = 0; i < len; ++i) st[i] = line_stencil(len, i, deriv, order, false);
  parallel_for(g.size(), [&](Index node) {
    const auto ijk = g.lattice(node);
    const int pos = ijk[axis];
    for (const auto& e : st[pos]) {
      auto at = ijk;
      at[axis] = e.index;
      dst.col(node) += (e.weight * scale) * src.col(g.node(at[0], at[1], at[2]));
    }
  });
  return dst;
}

struct RadialOps {
  Mat jz, jy, jzz, jyy, jyz, p;
  explicit RadialOps(int rank)
      : jz(rotation_generator(rank, 0, 1)), jy(rotation_generator(rank, 0, 2)),
        jzz(jz * jz), jyy(jy * jy), jyz(0.5 * (jz * jy + jy * jz)), p(half_turn(rank)) {}
};

// Radial derivative (deriv 1 or 2) along the axis with parity at the origin. Odd
// components are written f = r g with g even and differentiated through g, so the
// error vanishes at the origin like the exact tangential terms do.
Mat radial_line(const Grid& g, const Mat& src, const Mat& p, int deriv, int order) {
  const int len = static_cast<int>(g.size());
  const double h = g.h();
  const double scale = std::pow(h, -deriv);
  Mat even = src;
  std::vector<int> odd;
  for (int c = 0; c < p.rows(); ++c)
    if (p(c, c) < 0.0) odd.push_back(c);
  for (int c : odd) {
    for (int i = 1; i < len; ++i) even(c, i) = src(c, i) / (i * h);
    even(c, 0) = order >= 4 && len > 3 ? 1.5 * even(c, 1) - 0.6 * even(c, 2) + 0.1 * even(c, 3)
                                       : (4.0 * even(c, 1) - even(c, 2)) / 3.0;
  }
  Mat dst = Mat::Zero(src.rows(), src.cols());
  Mat d1 = Mat::Zero(src.rows(), src.cols());
  for (int i = 0; i < len; ++i) {
    for (const auto& e : line_stencil(len, i, deriv, order, true))
      dst.col(i) += (e.weight * scale) * even.col(e.index);
    if (deriv == 2 && !odd.empty())
      for (const auto& e : line_stencil(len, i, 1, order, true)) d1.col(i) += (e.weight / h) * even.col(e.index);
  }
  for (int c : odd)
    for (int i = 0; i < len; ++i) {
      const double r = i * h;
      dst(c, i) = deriv == 1 ? even(c, i) + r * dst(c, i) : 2.0 * d1(c, i) + r * dst(c, i);
    }
  return dst;
}

}  // namespace

template <int R>
Field<R + 1> d1(const Field<R>& f, int order) {
  check_differentiable(f);
  const Grid& g = *f.grid();
  constexpr int K = pow3(R);
  Field<R + 1> out(f.grid(), Frame::compactified, f.weight() + 1);
  const Mat src = f.data();
  if (g.mode() == GridMode::radial1d) {
    const RadialOps ops(R);
    const Mat tp = radial_line(g, src, ops.p, 1, order);
    for (Index i = 0; i < g.size(); ++i) {
      auto col = out.node(i);
      if (i == 0) {
        col.template segment<K>(0) = tp.col(0);
        col.template segment<K>(K) = ops.jz * tp.col(0);
        col.template segment<K>(2 * K) = ops.jy * tp.col(0);
      } else {
        const double r = g.r(i);
        col.template segment<K>(0) = tp.col(i);
        col.template segment<K>(K) = (ops.jz * src.col(i)) / r;
        col.template segment<K>(2 * K) = (ops.jy * src.col(i)) / r;
      }
    }
    return out;
  }
  for (int a = 0; a < 3; ++a) {
    const Mat da = axis_derivative(g, src, a, 1, order);
    out.data().middleRows(a * K, K) = da;
  }
  return out;
}

template <int R>
Field<R + 2> d2(const Field<R>& f, int order) {
  check_differentiable(f);
  const Grid& g = *f.grid();
  constexpr int K = pow3(R);
  Field<R + 2> out(f.grid(), Frame::compactified, f.weight() + 2);
  const Mat src = f.data();
  auto put = [&](Index i, int a, int b, const Eigen::VectorXd& v) {
    out.node(i).template segment<K>((3 * a + b) * K) = v;
    if (a != b) out.node(i).template segment<K>((3 * b + a) * K) = v;
  };
  if (g.mode() == GridMode::radial1d) {
    const RadialOps ops(R);
    const Mat tp = radial_line(g, src, ops.p, 1, order);
    const Mat tpp = radial_line(g, src, ops.p, 2, order);
    for (Index i = 0; i < g.size(); ++i) {
      if (i == 0) {
        const Eigen::VectorXd t2 = 0.5 * tpp.col(0);
        put(i, 0, 0, 2.0 * t2);
        put(i, 1, 1, ops.jzz * t2 + 2.0 * t2);
        put(i, 2, 2, ops.jyy * t2 + 2.0 * t2);
        put(i, 1, 2, ops.jyz * t2);
        put(i, 0, 1, ops.jz * t2);
        put(i, 0, 2, ops.jy * t2);
      } else {
        const double r = g.r(i);
        const Eigen::VectorXd t = src.col(i);
        const Eigen::VectorXd tr = tp.col(i) / r;
        const Eigen::VectorXd mixed = tr - t / (r * r);
        put(i, 0, 0, tpp.col(i));
        put(i, 1, 1, ops.jzz * t / (r * r) + tr);
        put(i, 2, 2, ops.jyy * t / (r * r) + tr);
        put(i, 1, 2, ops.jyz * t / (r * r));
        put(i, 0, 1, ops.jz * mixed);
        put(i, 0, 2, ops.jy * mixed);
      }
    }
    return out;
  }
  std::array<Mat, 3> first;
  for (int a = 0; a < 3; ++a) first[a] = axis_derivative(g, src, a, 1, order);
  for (int a = 0; a < 3; ++a) {
    const Mat daa = axis_derivative(g, src, a, 2, order);
    for (Index i = 0; i < g.size(); ++i) put(i, a, a, daa.col(i));
    for (int b = a + 1; b < 3; ++b) {
      const Mat dab = axis_derivative(g, first[b], a, 1, order);
      for (Index i = 0; i < g.size(); ++i) put(i, a, b, dab.col(i));
    }
  }
  return out;
}

template Field<1> d1<0>(const Field<0>&, int);
template Field<2> d1<1>(const Field<1>&, int);
template Field<3> d1<2>(const Field<2>&, int);
template Field<4> d1<3>(const Field<3>&, int);
template Field<2> d2<0>(const Field<0>&, int);
template Field<3> d2<1>(const Field<1>&, int);
template Field<4> d2<2>(const Field<2>&, int);

}  // namespace hyp

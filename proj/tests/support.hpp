#pragma once

#include <cmath>
#include <vector>

#include "hyperboloidal/geometry.hpp"

namespace hyp::test {

/// Least-squares slope of log e against log h.
inline double slope(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::log(h[k]), y = std::log(e[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double rho_of(const Vector3d& x) { return 0.5 * (1.0 - x.squaredNorm()); }

template <int R>
double interior_sup(const Field<R>& f) {
  double out = 0.0;
  for (Index n : f.grid()->interior_nodes()) out = std::max(out, f.node(n).norm());
  return out;
}

template <int R>
double interior_sup_diff(const Field<R>& a, const Field<R>& b) {
  double out = 0.0;
  for (Index n : a.grid()->interior_nodes()) out = std::max(out, (a.node(n) - b.node(n)).norm());
  return out;
}

}  // namespace hyp::test

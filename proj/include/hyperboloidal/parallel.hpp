#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <thread>
#include <vector>

namespace hyp {

/// Data-parallel width: SOLVER_THREADS if set and positive, else all hardware threads.
int solver_threads();

/// Runs f(i) for i in [0, n). Every index is visited exactly once; f must only write
/// state owned by index i.
template <typename F>
void parallel_for(Eigen::Index n, F&& f) {
  const int width = static_cast<int>(std::min<Eigen::Index>(solver_threads(), n / 4096 + 1));
  if (width <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (n + width - 1) / width;
  for (int t = 0; t < width; ++t) {
    const Eigen::Index lo = t * chunk;
    const Eigen::Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (Eigen::Index i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hyp

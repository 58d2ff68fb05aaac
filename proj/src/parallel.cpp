#include "hyperboloidal/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hyp {

int solver_threads() {
  static const int width = [] {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SOLVER_THREADS")) {
      try {
        const int v = std::stoi(env);
        if (v > 0) return std::min(v, hw);
      } catch (const std::exception&) {
      }
    }
    return hw;
  }();
  return width;
}

}  // namespace hyp

#include "speconion/parallel.hpp"

#include <algorithm>

namespace speconion {

namespace {
int g_max_threads = 0;
}

int max_threads() {
  if (g_max_threads > 0) return g_max_threads;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, hw);
}

void set_max_threads(int n) { g_max_threads = std::max(0, n); }

}  // namespace speconion

#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace speconion {

int max_threads();
void set_max_threads(int n);

// Index-parallel map; results must be written to per-index slots so the
// caller can reduce deterministically afterwards.
template <typename F>
void parallel_for(int n, F&& f) {
  const int nw = std::min(n, max_threads());
  if (nw <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace speconion

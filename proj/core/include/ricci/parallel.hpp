#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ricci {

/// Worker cap: `requested` when positive, else RICCI_LAB_THREADS, else
/// hardware concurrency.
int resolve_threads(int requested);

/// Static block partition of [0, n); results must be written to
/// preallocated slots so that output is independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ricci

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace fpt {

// Worker count resolution: explicit request wins, then the FPT_THREADS
// environment variable, then whatever the hardware reports.
inline int default_thread_count() {
  if (const char* env = std::getenv("FPT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline int resolve_thread_count(int requested) {
  return requested >= 1 ? requested : default_thread_count();
}

// Runs body(i) for i in [0, n) over at most `threads` workers. Indices are
// split into contiguous blocks, one per worker, so the mapping from index to
// worker is a pure function of (n, threads); callers that write to disjoint
// slots per index therefore produce identical results at any worker count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
  const int workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace fpt

#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace bse {

/// Resolves a thread-count request: 0 means hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn over [0,n) split into contiguous chunks, one per worker.
/// Every index is processed exactly once and writes to index-addressed
/// slots stay deterministic under any thread count.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const int t = std::min<std::int64_t>(resolve_threads(threads), n > 0 ? n : 1);
  if (t <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  const std::int64_t chunk = (n + t - 1) / t;
  for (int k = 0; k < t; ++k) {
    const std::int64_t lo = k * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace bse

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace condgen {

/// Worker count: CONDGEN_THREADS caps it, hardware concurrency is the default.
inline int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("CONDGEN_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

/// Runs fn(begin, end, chunk_index) over fixed-size chunks of [0, n).
/// Chunk boundaries are independent of the thread count, so any per-chunk
/// accumulation reduced in chunk order is reproducible.
inline void parallel_chunks(long n, long chunk_size,
                            const std::function<void(long, long, long)>& fn) {
  if (n <= 0) return;
  const long n_chunks = (n + chunk_size - 1) / chunk_size;
  const int workers = std::min<long>(thread_budget(), n_chunks);
  if (workers <= 1) {
    for (long c = 0; c < n_chunks; ++c)
      fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([=] {
      for (long c = w; c < n_chunks; c += workers)
        fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace condgen

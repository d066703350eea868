#ifndef RWDPP_PARALLEL_HPP
#define RWDPP_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rwdpp {

// Deterministic work splitting: items are partitioned into a fixed number of
// contiguous chunks that depends only on the item count, never on the worker
// count. Workers pull chunks from an atomic counter; callers accumulate
// per-chunk results and reduce them in chunk order, so every numerical
// output is invariant under the `jobs` setting.
inline std::int64_t chunk_count(std::int64_t n_items) {
  return n_items < 256 ? (n_items > 0 ? n_items : 0) : 256;
}

inline void parallel_chunks(std::int64_t n_items, int jobs,
                            const std::function<void(std::int64_t chunk, std::int64_t begin,
                                                     std::int64_t end)>& body) {
  const std::int64_t chunks = chunk_count(n_items);
  if (chunks == 0) return;
  if (jobs < 1) jobs = 1;

  auto chunk_range = [&](std::int64_t c) {
    const std::int64_t begin = n_items * c / chunks;
    const std::int64_t end = n_items * (c + 1) / chunks;
    return std::pair<std::int64_t, std::int64_t>{begin, end};
  };

  if (jobs == 1 || chunks == 1) {
    for (std::int64_t c = 0; c < chunks; ++c) {
      auto [b, e] = chunk_range(c);
      body(c, b, e);
    }
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        auto [b, e] = chunk_range(c);
        body(c, b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  const int n_threads = static_cast<int>(std::min<std::int64_t>(jobs, chunks));
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rwdpp

#endif  // RWDPP_PARALLEL_HPP

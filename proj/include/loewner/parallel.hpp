#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace loewner {

namespace detail {
inline std::atomic<unsigned> g_thread_count{0};
}

/// Worker count used by every parallel loop; 0 means hardware concurrency.
inline void set_thread_count(unsigned n) { detail::g_thread_count.store(n); }

inline unsigned thread_count() {
  unsigned n = detail::g_thread_count.load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Calls f(i) for i in [0, n). Work is split into contiguous chunks; the first
/// exception thrown by any worker is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t min_chunk = 64) {
  unsigned workers = thread_count();
  if (workers <= 1 || n < 2 * min_chunk) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n / min_chunk));
  std::atomic<std::size_t> next{0};
  std::size_t chunk = std::max<std::size_t>(min_chunk, n / (8 * workers));
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      std::size_t end = std::min(n, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace loewner

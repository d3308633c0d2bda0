#pragma once

// Minimal fork-join over an index range. Work is split into contiguous
// blocks, one per thread, so output written by index is independent of the
// thread count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace csl {

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> n{0};  // 0: not set, read the environment
  return n;
}
}  // namespace detail

// Explicit setting, else CSL_THREADS, else 1.
inline int thread_count() {
  const int n = detail::thread_setting().load();
  if (n > 0) return n;
  if (const char* env = std::getenv("CSL_THREADS")) {
    const int e = std::atoi(env);
    if (e > 0) return e;
  }
  return 1;
}

inline void set_thread_count(int n) { detail::thread_setting().store(std::max(0, n)); }

template <class F>
void parallel_for(std::size_t n, F&& body) {
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const std::size_t lo = n * t / threads, hi = n * (t + 1) / threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace csl

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace riskpath {

// RISKPATH_THREADS caps intra-stage parallelism; read per call so tests can
// flip it between runs.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RISKPATH_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), 256u);
  }
  return hw;
}

// Static block partition; fn(i) must only touch state owned by index i, which
// makes the result independent of the thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned threads = std::min<std::size_t>(thread_count(), n);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  std::mutex err_mutex;
  std::exception_ptr err;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([lo, hi, &fn, &err_mutex, &err] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace riskpath

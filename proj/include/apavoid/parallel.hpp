#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace apavoid {

/// Worker count: explicit request, else $APAVOID_THREADS, else 1.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("APAVOID_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

namespace detail {

template <class Worker>
void run_workers(unsigned threads, std::size_t count, Worker&& worker) {
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
  if (n <= 1) {
    worker();
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      try {
        worker();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Calls fn(i) for every i in [0, count).
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  detail::run_workers(threads, count, [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  });
}

/// Smallest i in [0, count) with task(i) == true. Every task with index below the
/// answer runs to completion; tasks above it may be skipped. The result is therefore
/// independent of the worker count as long as task(i) depends only on i.
template <class Task>
std::optional<std::size_t> parallel_first(std::size_t count, unsigned threads, Task&& task) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> best{count};
  detail::run_workers(threads, count, [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      if (i > best.load()) return;
      if (task(i)) {
        std::size_t cur = best.load();
        while (i < cur && !best.compare_exchange_weak(cur, i)) {
        }
      }
    }
  });
  if (best.load() == count) return std::nullopt;
  return best.load();
}

}  // namespace apavoid

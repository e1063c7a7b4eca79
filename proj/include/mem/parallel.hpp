#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mem::parallel {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{1};
  return cap;
}
inline thread_local bool inside_worker = false;
}  // namespace detail

/// Upper bound on worker threads used by any library routine. Output values
/// never depend on it: work is split into fixed-size chunks and partial
/// results are combined in a fixed order.
inline unsigned max_threads() { return detail::thread_cap().load(std::memory_order_relaxed); }

inline void set_max_threads(unsigned k) { detail::thread_cap().store(std::max(1u, k), std::memory_order_relaxed); }

/// Reads MEM_THREADS; returns `fallback` when unset or malformed.
inline unsigned threads_from_env(unsigned fallback) {
  const char* raw = std::getenv("MEM_THREADS");
  if (raw == nullptr) return fallback;
  try {
    const long v = std::stol(raw);
    return v >= 1 ? static_cast<unsigned>(v) : fallback;
  } catch (...) {
    return fallback;
  }
}

/// Runs body(i) for i in [0, count). Nested calls from inside a worker run
/// serially so an outer parallel loop is never oversubscribed.
template <typename Body>
void for_each_index(std::size_t count, Body&& body, std::size_t min_parallel = 2) {
  const unsigned cap = detail::inside_worker ? 1u : max_threads();
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(cap, count));
  if (workers <= 1 || count < min_parallel) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    detail::inside_worker = true;
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
    detail::inside_worker = false;
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
  }
  if (error) std::rethrow_exception(error);
}

/// Pairwise (tree) reduction of partials in index order, in place. The tree
/// shape depends only on partials.size().
template <typename T, typename Combine>
T pairwise_reduce(std::vector<T>& partials, Combine&& combine) {
  if (partials.empty()) return T{};
  for (std::size_t stride = 1; stride < partials.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < partials.size(); i += 2 * stride) {
      combine(partials[i], partials[i + stride]);
    }
  }
  return std::move(partials.front());
}

}  // namespace mem::parallel

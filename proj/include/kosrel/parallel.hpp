#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kosrel {

/// Runs fn(task) for task in [0, n_tasks) on up to `threads` workers.
/// Tasks are claimed dynamically; callers that need deterministic output
/// write to per-task slots and reduce in task order afterwards.
/// The first exception thrown by any task is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n_tasks, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n_tasks <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < n_tasks;) {
      try {
        fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_tasks);
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(threads, n_tasks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers - 1);
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Fixed-size blocks over [0, n). Block boundaries depend only on n and
/// block_size, never on the thread count.
template <typename Fn>
void parallel_blocks(std::size_t n, std::size_t block_size, unsigned threads, Fn&& fn) {
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    fn(b, b * block_size, std::min(n, (b + 1) * block_size));
  });
}

inline unsigned default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace kosrel

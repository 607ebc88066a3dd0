#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ivfts {

/// Runs fn(i) for i in [0, count) on up to hardware_concurrency threads.
///
/// Work is split into contiguous chunks; callers write into slot i of a
/// pre-sized output so results never depend on the schedule. The first
/// exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t max_threads = 0) {
  if (count == 0) return;
  std::size_t threads = max_threads ? max_threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ivfts

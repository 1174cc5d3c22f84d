#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace relucirc::detail {

inline std::size_t worker_count(std::size_t requested, std::uint64_t work, std::uint64_t min_per_worker = 4096) {
  std::size_t t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t cap = std::max<std::uint64_t>(1, work / min_per_worker);
  return static_cast<std::size_t>(std::min<std::uint64_t>(t, cap));
}

/// Runs fn(worker, begin, end) over `threads` contiguous slices of [0, total).
template <typename Fn>
void parallel_chunks(std::size_t threads, std::uint64_t total, Fn fn) {
  if (threads <= 1) {
    fn(std::size_t{0}, std::uint64_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::uint64_t begin = total * t / threads;
    const std::uint64_t end = total * (t + 1) / threads;
    pool.emplace_back(fn, t, begin, end);
  }
  for (auto& th : pool) th.join();
}

}  // namespace relucirc::detail

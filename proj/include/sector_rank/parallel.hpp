#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sector_rank {

/// Runs body(i) for i in [0, count) on at most `jobs` threads. Results must be
/// written by index so the outcome does not depend on scheduling. The
/// exception from the lowest failing index is rethrown after all workers join.
template <typename F>
void parallel_for(std::size_t count, std::size_t jobs, F&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex m;
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(m);
      if (i < error_index) error_index = i, error = std::current_exception();
    }
  };
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t j = 0; j < jobs; ++j)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    for (auto& w : workers) w.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sector_rank

#pragma once

// Static partition of independent trials over a small thread pool.

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace maxplus::detail {

/// Runs fn(trial) for trial in [0, count). Trials must be independent; the
/// partition is static so results never depend on scheduling.
template <typename Fn>
void parallel_for_trials(std::size_t count, Fn&& fn) {
  const std::size_t hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min(count, hw == 0 ? std::size_t{1} : hw);
  if (workers <= 1) {
    for (std::size_t t = 0; t < count; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < count; t += workers) fn(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace maxplus::detail

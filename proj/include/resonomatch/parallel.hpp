#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace resonomatch {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads with a static strided
// partition. The first exception (lowest index) is rethrown after all threads join.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  const int w = std::min(resolve_workers(workers), std::max(n, 1));
  if (w <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (int t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      for (int i = t; i < n; i += w) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace resonomatch

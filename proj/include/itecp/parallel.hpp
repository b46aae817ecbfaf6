#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace itecp {

// Worker count: ITECP_WORKERS env var, else hardware concurrency, clamped to [1,64].
inline int worker_count_from_env() {
  if (const char* env = std::getenv("ITECP_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n < 64 ? n : 64;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw > 64 ? 64 : hw) : 1;
}

// Runs fn(0..n-1) on up to `workers` threads. Tasks must write only to their
// own output slot; results are then independent of scheduling, so output is
// identical for any worker count.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int n_threads = workers < n ? workers : n;
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

}  // namespace itecp

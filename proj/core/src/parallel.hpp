#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace statecap::detail {

// Runs body(i) for i in [0, n). Tasks must write only to their own slots;
// callers reduce results in index order afterwards, so outputs do not depend
// on the worker count.
template <typename F>
void parallel_for(int n, int workers, F&& body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  int threads = workers < n ? workers : n;
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace statecap::detail

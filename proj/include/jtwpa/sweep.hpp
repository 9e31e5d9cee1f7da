#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace jtwpa {

// Runs fn(i) for i in [0, count) on a bounded pool. Points are independent;
// each writes only its own result slot, so merged output is order-stable
// regardless of the worker count.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int n = std::min(workers, count);
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace jtwpa

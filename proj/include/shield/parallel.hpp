#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace shield {

// Runs fn(i) for i in [0, count). With workers <= 1 this is a plain loop;
// otherwise indices are pulled from an atomic counter by `workers` threads.
// fn(i) must only touch slot-i state, so results never depend on the number
// of workers.
inline void parallel_for(int workers, std::size_t count,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int n = static_cast<int>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (int w = 0; w < n; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace shield

#include "riskenv/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace riskenv {

namespace {
std::atomic<int> g_thread_cap{1};
}

void set_thread_cap(int threads) {
  g_thread_cap.store(std::max(1, threads));
}

int thread_cap() { return g_thread_cap.load(); }

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace riskenv

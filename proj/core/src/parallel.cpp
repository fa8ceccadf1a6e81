#include "mmt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mmt {

namespace {
std::atomic<int> g_cap{1};
}

void set_worker_cap(int threads) { g_cap.store(std::max(1, threads)); }
int worker_cap() { return g_cap.load(); }

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int cap = std::min(worker_cap(), count);
  if (cap <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(cap);
  const int chunk = (count + cap - 1) / cap;
  for (int t = 0; t < cap; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mmt

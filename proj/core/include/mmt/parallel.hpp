#pragma once

#include <functional>

namespace mmt {

/// Global worker cap for embarrassingly parallel loops (1 = serial).
/// Results are deterministic for any cap: iterations write disjoint slots
/// and reductions run serially in index order.
void set_worker_cap(int threads);
int worker_cap();

/// Runs fn(i) for i in [0, count) on up to worker_cap() threads.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace mmt

#pragma once

#include <cstddef>
#include <functional>

namespace lopashka {

// Worker count: explicit override if set, else LOPASHKA_THREADS, else hardware concurrency.
int thread_count();
void set_thread_count(int threads);

// Runs body(i) for i in [0, count) on a static partition of the index range.
// Callers write results into per-index slots, so any reduction done afterwards
// in index order is deterministic regardless of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lopashka

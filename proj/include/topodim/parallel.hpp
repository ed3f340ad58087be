// Minimal internal parallelism helper. Workers get disjoint contiguous
// index ranges and must write disjoint state, so results never depend on
// the number of threads.
#pragma once

#include <cstddef>
#include <functional>

namespace topodim {

// Process-wide bound on worker threads (the CLI's --threads). 0 restores
// the hardware default.
void set_thread_budget(unsigned n);
unsigned thread_budget();

// Runs body(begin, end) over a partition of [0, count).
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

} // namespace topodim

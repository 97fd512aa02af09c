#pragma once

#include <cstddef>
#include <functional>

namespace evstab {

// Worker count from EV_STAB_THREADS (default: hardware concurrency).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on contiguous fixed blocks; results must be written to
// per-index storage so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace evstab

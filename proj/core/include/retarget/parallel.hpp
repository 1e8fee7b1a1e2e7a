#pragma once

#include <cstddef>
#include <functional>

namespace retarget {

// Number of worker threads used by parallel_for; 0 selects hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(i) for i in [0, n). Work is split into contiguous blocks; callers
// must write results to index-addressed slots so output never depends on
// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace retarget

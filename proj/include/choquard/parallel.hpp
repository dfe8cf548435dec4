#pragma once

#include <cstddef>
#include <functional>

namespace choquard {

/// Worker count for operator application: CHOQUARD_THREADS if set, else hardware concurrency.
int worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is visited exactly once.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace choquard

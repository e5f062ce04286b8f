#pragma once

#include <cstddef>
#include <functional>

namespace moldgen {

/// Worker count: MOLDGEN_THREADS when set and positive, else the hardware
/// concurrency (0 in the variable also means auto).
std::size_t thread_count();

/// Runs body(k) for k in [0, n). Work is split into contiguous blocks, so
/// callers writing disjoint outputs get thread-count independent results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace moldgen

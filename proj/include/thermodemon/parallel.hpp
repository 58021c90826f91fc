#pragma once

#include <cstddef>
#include <functional>

namespace thermodemon
{

/// Worker count: hardware concurrency, capped by THERMODEMON_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index must write only to its own slot;
/// results then do not depend on how indices are spread over threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace thermodemon

#pragma once

#include <cstddef>
#include <functional>

namespace carasel {

/// Worker cap: CARASEL_THREADS if set to a positive integer, else the hardware concurrency.
std::size_t thread_cap();

/// Runs fn(0..n-1) on up to thread_cap() threads. Callers write results by index, so output order is fixed.
/// The exception of the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace carasel

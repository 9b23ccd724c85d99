#pragma once

#include <cstddef>
#include <functional>

namespace ptyblind {

/// Runs fn(i) for i in [0, n). Tasks are distributed over a process-wide
/// thread pool; results must be written to per-index slots and reduced by
/// the caller in index order so that reductions stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Worker count (PTYBLIND_THREADS overrides hardware concurrency).
int thread_count();

}  // namespace ptyblind

#pragma once

#include <functional>

namespace consensus {

/// Worker count from CONSENSUS_MESH_THREADS (0 or unset = hardware concurrency).
int thread_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the worker count, and each index is visited once.
void parallel_for(int n, const std::function<void(int, int)>& fn, int max_workers = 0);

}  // namespace consensus

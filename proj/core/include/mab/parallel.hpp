#ifndef MAB_PARALLEL_HPP
#define MAB_PARALLEL_HPP

#include <functional>

namespace mab {

/// Chunk granularity of parallel_for; fixed so chunkwise reductions do not
/// depend on the worker count.
inline constexpr int kParallelChunk = 1024;

/// Worker count: hardware concurrency capped by the MA_BELLMAN_THREADS
/// environment variable (values < 1 mean single-threaded).
int worker_count();

/// Runs fn(begin, end) over [0, n) in fixed-size chunks distributed across
/// workers. Chunking is independent of the worker count, so per-index work
/// and chunkwise reductions are deterministic.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace mab

#endif

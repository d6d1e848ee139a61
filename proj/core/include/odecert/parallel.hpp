#ifndef ODECERT_PARALLEL_HPP
#define ODECERT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace odecert {

/// Thread cap: ODE_CERTIFY_THREADS if set, else hardware concurrency.
int thread_budget();

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks handed
/// to at most `threads` workers. Only safe when iterations are independent.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Deterministic chunked reduction. The index range [0, n) is split into
/// `n_chunks` contiguous chunks. For each chunk, `accumulate` is called with
/// (begin, end, slot) and must fold items in index order into the slot
/// buffer it is given (slots are zero-initialized by `reset`). Chunks are
/// then combined in chunk order via `combine(slot)`, so the result is
/// independent of thread count and scheduling.
///
/// Slots are identified by an int in [0, kReduceSlots); the caller owns the
/// slot storage. Chunks are processed in waves of kReduceSlots so the number
/// of live slot buffers stays bounded.
inline constexpr int kReduceSlots = 16;

void chunked_reduce(std::size_t n, int n_chunks, int threads,
                    const std::function<void(int slot)>& reset,
                    const std::function<void(std::size_t begin, std::size_t end, int slot)>& accumulate,
                    const std::function<void(int slot)>& combine);

}  // namespace odecert

#endif  // ODECERT_PARALLEL_HPP

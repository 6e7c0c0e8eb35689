#pragma once

#include <cstddef>
#include <functional>

namespace qwem {

// Process-wide worker count. Resolution order: explicit set_thread_count()
// (e.g. from --threads), else the QWEM_THREADS environment variable, else 1.
// Parallel sections are written so results are identical for every count.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs fn(begin, end) over disjoint contiguous blocks of [0, n) on
// thread_count() workers. Each block is owned by exactly one worker, so
// writes to per-index storage need no synchronization.
void parallel_for_blocks(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace qwem

#pragma once

// Deterministic data-parallel helper. Work items are partitioned into
// contiguous chunks; results must be written to per-item slots or per-chunk
// accumulators that the caller merges in index order, so the outcome cannot
// depend on the worker count.

#include <cstdint>
#include <thread>
#include <vector>

namespace taukit {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Calls fn(first, last, chunk_index) on disjoint [first, last) ranges covering [0, n).
template <typename Fn>
void parallel_chunks(std::int64_t n, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (n <= 0) return;
    const int chunks = static_cast<int>(std::min<std::int64_t>(workers, n));
    if (chunks == 1) {
        fn(std::int64_t{0}, n, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (int c = 0; c < chunks; ++c) {
        const std::int64_t first = n * c / chunks;
        const std::int64_t last = n * (c + 1) / chunks;
        pool.emplace_back([&fn, first, last, c] { fn(first, last, c); });
    }
    for (auto& t : pool) t.join();
}

} // namespace taukit

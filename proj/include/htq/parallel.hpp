#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace htq {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, total) into a fixed number of chunks and maps fn(chunk, lo, hi)
// over them with up to `threads` workers. The chunk layout never depends on
// the worker count and results are collected by chunk index, so the returned
// vector is identical for any thread count.
template <class T, class Fn>
std::vector<T> run_chunked(uint64_t total, int chunks, int threads, Fn fn) {
    if (chunks < 1) chunks = 1;
    std::vector<T> results(static_cast<size_t>(chunks));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int c = next.fetch_add(1);
            if (c >= chunks) break;
            uint64_t lo = total * static_cast<uint64_t>(c) / static_cast<uint64_t>(chunks);
            uint64_t hi = total * static_cast<uint64_t>(c + 1) / static_cast<uint64_t>(chunks);
            results[static_cast<size_t>(c)] = fn(c, lo, hi);
        }
    };
    int n_workers = std::min(resolve_threads(threads), chunks);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

}  // namespace htq

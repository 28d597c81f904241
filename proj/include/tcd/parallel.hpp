#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tcd {

/// Replicates are grouped in fixed-size chunks; each chunk is reduced in index
/// order and chunks are combined in chunk order, so the floating-point result
/// does not depend on the number of worker threads.
inline constexpr std::size_t kReplicateChunk = 512;

inline unsigned worker_count(std::size_t tasks) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(tasks, 1)));
}

/// Deterministic chunked reduction over [0, count).
///   init()            -> Acc
///   step(Acc&, index) -> void
///   merge(Acc&, const Acc&) -> void
template <class Init, class Step, class Merge>
auto parallel_reduce(std::size_t count, Init init, Step step, Merge merge, unsigned threads = 0) {
    using Acc = decltype(init());
    const std::size_t chunks = (count + kReplicateChunk - 1) / kReplicateChunk;
    std::vector<Acc> partial;
    partial.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) partial.push_back(init());

    auto run_chunk = [&](std::size_t c) {
        const std::size_t lo = c * kReplicateChunk;
        const std::size_t hi = std::min(count, lo + kReplicateChunk);
        for (std::size_t i = lo; i < hi; ++i) step(partial[c], i);
    };

    if (threads == 0) threads = worker_count(chunks);
    if (threads <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = w; c < chunks; c += threads) run_chunk(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    Acc total = init();
    for (const auto& p : partial) merge(total, p);
    return total;
}

}  // namespace tcd

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace dpc {

// Global worker count used by the parallel loops below. The summation
// order is always a pure function of the problem size, so results are
// bitwise identical for any setting.
inline std::atomic<int>& detail_thread_count() {
    static std::atomic<int> v{1};
    return v;
}
inline int max_threads() noexcept { return detail_thread_count().load(std::memory_order_relaxed); }
inline void set_max_threads(int n) { detail_thread_count().store(n < 1 ? 1 : n, std::memory_order_relaxed); }

// Pairwise (cascade) summation. Error grows like O(log n) instead of O(n),
// and the reduction tree depends only on the length.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

// True inside a worker thread; nested parallel loops degrade to serial
// execution instead of oversubscribing.
inline thread_local bool tl_inside_parallel = false;

// Runs fn(block) for block in [0, nblocks). Blocks are claimed by an atomic
// counter, so scheduling varies, but callers store per-block results and
// combine them in index order afterwards.
template <typename F>
void parallel_for_blocks(std::size_t nblocks, F&& fn) {
    int nthreads = max_threads();
    if (tl_inside_parallel || nthreads <= 1 || nblocks <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    if (static_cast<std::size_t>(nthreads) > nblocks)
        nthreads = static_cast<int>(nblocks);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            tl_inside_parallel = true;
            for (;;) {
                if (failed.load(std::memory_order_relaxed)) return;
                const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
                if (b >= nblocks) return;
                try {
                    fn(b);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline constexpr std::size_t kSumBlock = 4096;

// Deterministic parallel reduction of term(i) over [0, n). Fixed block
// size, per-block pairwise sums, blocks combined in index order.
template <typename F>
double blocked_sum(std::size_t n, F&& term) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for_blocks(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * kSumBlock;
        const std::size_t hi = lo + kSumBlock < n ? lo + kSumBlock : n;
        double buf[kSumBlock];
        std::size_t m = 0;
        for (std::size_t i = lo; i < hi; ++i) buf[m++] = term(i);
        partial[b] = pairwise_sum(std::span<const double>(buf, m));
    });
    return pairwise_sum(partial);
}

}  // namespace dpc

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

// Path-parallel estimation with deterministic reduction.
//
// Paths are embarrassingly parallel.  Workers claim fixed-size chunks of the
// path range; each chunk accumulates (sum, sum of squares) sequentially and
// the chunk results are merged in chunk order after all workers join.  The
// result is bit-identical for any worker count.

namespace umc {

struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& what) : std::runtime_error(what) {}
};

/// sigma(t,S) <= 0 (or C not positive definite) at a visited state.
struct NonPositiveVol : EngineError {
    NonPositiveVol(const std::string& what, double t, double s, std::uint64_t path)
        : EngineError(what + " at t=" + std::to_string(t) + ", state=" + std::to_string(s) +
                      ", path=" + std::to_string(path)),
          t_at(t), state_at(s), path_index(path) {}
    double t_at;
    double state_at;
    std::uint64_t path_index;
};

struct EstimatorResult {
    double mean = 0.0;
    double std_error = 0.0;      // sample std / sqrt(N)
    double variance = 0.0;       // empirical per-path variance
    double ci99_half_width = 0.0;  // 2.576 * std_error
    std::uint64_t n_paths = 0;
    double seconds = 0.0;
    std::uint64_t terminal_floor_count = 0;  // degenerate last segments floored at 1e-12
    std::uint64_t domain_exit_count = 0;     // excursions outside a model's admissible box
};

/// Per-path diagnostics row: (path index, Poisson jump count, undiscounted
/// contribution, discount factor applied).
struct PathDiag {
    std::uint64_t path_index = 0;
    std::uint32_t jumps = 0;
    double p_t = 0.0;
    double discount = 1.0;
};

struct RunOptions {
    int threads = 0;  // 0: UNBIASEDMC_THREADS env var, else hardware concurrency
    std::vector<PathDiag>* diagnostics = nullptr;  // filled in path order when set
};

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("UNBIASEDMC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace detail {

struct ChunkStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t floored = 0;
    std::uint64_t domain_exits = 0;
};

// Reduction chunk size is a fixed constant: it defines the summation
// grouping, so changing it would change rounding.
inline constexpr std::uint64_t kChunkSize = 4096;

}  // namespace detail

/// Shortest admissible terminal segment; a Poisson time landing within this
/// distance of maturity is floored and counted in the diagnostics.
inline constexpr double kMinTerminalDt = 1e-12;

/// Per-path extras a path functor can report back to the runner.
struct PathExtras {
    bool terminal_floored = false;
    bool domain_exited = false;
};

/// Runs `fn(path_index, extras)` for every path index in [0, n_paths) and
/// reduces the returned contributions deterministically.
template <typename PathFn>
EstimatorResult run_paths(std::uint64_t n_paths, int threads, PathFn&& fn) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    const std::uint64_t n_chunks =
        (n_paths + detail::kChunkSize - 1) / detail::kChunkSize;
    std::vector<detail::ChunkStats> chunks(n_chunks);

    const int n_threads =
        static_cast<int>(std::min<std::uint64_t>(resolve_thread_count(threads),
                                                 std::max<std::uint64_t>(n_chunks, 1)));
    std::atomic<std::uint64_t> next_chunk{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::uint64_t cid = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (cid >= n_chunks || failed.load(std::memory_order_relaxed)) return;
            detail::ChunkStats cs;
            const std::uint64_t lo = cid * detail::kChunkSize;
            const std::uint64_t hi = std::min(n_paths, lo + detail::kChunkSize);
            try {
                for (std::uint64_t i = lo; i < hi; ++i) {
                    PathExtras extras;
                    const double v = fn(i, extras);
                    cs.sum += v;
                    cs.sum_sq += v * v;
                    if (extras.terminal_floored) ++cs.floored;
                    if (extras.domain_exited) ++cs.domain_exits;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
            chunks[cid] = cs;
        }
    };

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EstimatorResult res;
    res.n_paths = n_paths;
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& cs : chunks) {
        sum += cs.sum;
        sum_sq += cs.sum_sq;
        res.terminal_floor_count += cs.floored;
        res.domain_exit_count += cs.domain_exits;
    }
    if (n_paths > 0) {
        res.mean = sum / static_cast<double>(n_paths);
        if (n_paths > 1) {
            const double nd = static_cast<double>(n_paths);
            res.variance = std::max(0.0, (sum_sq - nd * res.mean * res.mean) / (nd - 1.0));
            res.std_error = std::sqrt(res.variance / nd);
        }
    }
    res.ci99_half_width = 2.576 * res.std_error;
    res.seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(clock::now() - start).count();
    return res;
}

}  // namespace umc

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asyrk/dense.hpp"
#include "asyrk/kaczmarz.hpp"
#include "asyrk/trace.hpp"

namespace asyrk {

enum class ParSampling {
    with_replacement,  // uniform row draws, each worker its own stream
    slice_shuffle,     // equal row slices per worker, reshuffled each pass
};

struct RunConfig {
    index_t threads = 1;
    double gamma = 1.0;
    index_t epochs = 100;        // cap; one epoch = m row updates globally
    double target_r_sq = 0.0;
    UpdateVariant variant = UpdateVariant::full_row;
    ParSampling sampling = ParSampling::slice_shuffle;
    std::uint64_t seed = 0;
    index_t snapshot_interval = 1;  // epochs between residual measurements
    // Either oracle enables dist_sq in the trace; x_star wins when both set.
    const std::vector<double>* x_star = nullptr;
    const SolutionProjector* projector = nullptr;
};

/// Bookkeeping of an instrumented run: every applied component increment is
/// also summed into a worker-private shadow vector, and at termination the
/// shared vector must equal x0 plus the shadow total within rounding.
struct InstrumentReport {
    index_t row_updates = 0;   // iterations (row events) applied
    index_t increments = 0;    // component-level increments applied
    double max_abs_error = 0.0;
    double tolerance = 0.0;    // 1e-9 * increments
    bool consistent = false;
};

/// Lock-free shared-memory solver. Workers pick rows (own slice shuffled per
/// pass, or uniform with replacement from their own stream), read the needed
/// components of x without locking, and apply each component increment as a
/// single-element compare-and-swap add; a coordinator snapshots the live
/// vector every snapshot_interval epochs without quiescing the workers, so
/// mid-run r_sq is approximate. Workers are joined before the final exact
/// record. threads=1 takes a deterministic inline path whose trace is
/// bit-identical to rk_solve under matched sampling and gamma=1 full_row.
Trace solve_parallel(const CsrMatrix& A, std::span<const double> b,
                     std::span<const double> x0, const RunConfig& cfg,
                     InstrumentReport* instrument = nullptr);

struct SpeedupEntry {
    index_t threads = 0;
    double wall_seconds = 0.0;
    index_t epochs = 0;      // epoch count at termination
    double final_r_sq = 0.0;
    double speedup = 0.0;    // wall(1) / wall(threads)
};

struct SpeedupReport {
    std::vector<SpeedupEntry> entries;
    std::string to_json() const;
    std::string to_csv() const;
};

/// Runs solve_parallel once per thread count to the same target. thread_list
/// must contain 1 (the speedup reference). Wall-clock ordering is reported,
/// never asserted.
SpeedupReport sweep_threads(const CsrMatrix& A, std::span<const double> b,
                            std::span<const double> x0, const RunConfig& cfg,
                            std::span<const index_t> thread_list);

} // namespace asyrk

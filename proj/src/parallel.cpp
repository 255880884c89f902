#include "asyrk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <system_error>
#include <thread>

#include <json.hpp>

#include "asyrk/error.hpp"
#include "asyrk/rng.hpp"

namespace asyrk {

namespace {

/// Exactly-once lock-free addition to one element: CAS retry on the value.
inline void atomic_add(std::atomic<double>& cell, double delta) {
    double cur = cell.load(std::memory_order_relaxed);
    while (!cell.compare_exchange_weak(cur, cur + delta,
                                       std::memory_order_relaxed)) {
    }
}

const char* variant_name(UpdateVariant v) {
    return v == UpdateVariant::full_row ? "full_row" : "single_component";
}

const char* sampling_name(ParSampling s) {
    return s == ParSampling::slice_shuffle ? "slice_shuffle"
                                           : "with_replacement";
}

std::string run_config_json(const RunConfig& cfg, index_t m, index_t n) {
    nlohmann::json c;
    c["solver"] = "asyrk_parallel";
    c["m"] = m;
    c["n"] = n;
    c["threads"] = cfg.threads;
    c["gamma"] = cfg.gamma;
    c["epochs"] = cfg.epochs;
    c["target_r_sq"] = cfg.target_r_sq;
    c["variant"] = variant_name(cfg.variant);
    c["sampling"] = sampling_name(cfg.sampling);
    c["seed"] = cfg.seed;
    c["snapshot_interval"] = cfg.snapshot_interval;
    c["epoch_updates"] = m;  // one epoch = m row updates (not n)
    c["dist_oracle"] =
        cfg.x_star ? "x_star" : (cfg.projector ? "projector" : "none");
    return c.dump();
}

void validate_config(const CsrMatrix& A, std::span<const double> b,
                     std::span<const double> x0, const RunConfig& cfg) {
    if (static_cast<index_t>(b.size()) != A.rows() ||
        static_cast<index_t>(x0.size()) != A.cols()) {
        fail(ErrorCode::DimensionMismatch,
             "solve_parallel: b or x0 size mismatch");
    }
    if (!A.is_normalized()) {
        fail(ErrorCode::NotNormalized, "solve_parallel requires normalized rows");
    }
    if (cfg.threads < 1) {
        fail(ErrorCode::InvalidArgument, "threads must be >= 1");
    }
    if (!(cfg.gamma > 0.0)) {
        fail(ErrorCode::InvalidGamma, "gamma must be positive");
    }
    if (cfg.epochs < 0 || cfg.snapshot_interval < 1) {
        fail(ErrorCode::InvalidArgument,
             "epochs must be >= 0 and snapshot_interval >= 1");
    }
    if (cfg.sampling == ParSampling::slice_shuffle && A.rows() < cfg.threads) {
        fail(ErrorCode::InvalidArgument,
             "slice_shuffle needs at least one row per worker");
    }
}

double oracle_dist_sq(const RunConfig& cfg, std::span<const double> x) {
    if (cfg.x_star) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double d = x[k] - (*cfg.x_star)[k];
            s += d * d;
        }
        return s;
    }
    return cfg.projector->dist_sq(x);
}

void finish_instrument(InstrumentReport& rep, std::span<const double> x_final,
                       std::span<const double> x0,
                       std::span<const double> shadow_total) {
    rep.max_abs_error = 0.0;
    for (std::size_t t = 0; t < x_final.size(); ++t) {
        rep.max_abs_error =
            std::max(rep.max_abs_error,
                     std::abs(x_final[t] - x0[t] - shadow_total[t]));
    }
    rep.tolerance =
        1e-9 * static_cast<double>(std::max<index_t>(rep.increments, 1));
    rep.consistent = rep.max_abs_error <= rep.tolerance;
}

/// threads=1: no atomics, same draw stream as worker 0, same update kernel as
/// rk_solve. With gamma=1, full_row and slice_shuffle this reproduces the
/// serial solver's trace bit for bit.
Trace solve_single(const CsrMatrix& A, std::span<const double> b,
                   std::span<const double> x0, const RunConfig& cfg,
                   InstrumentReport* instrument) {
    const index_t m = A.rows();
    const index_t n = A.cols();
    auto gen = make_stream(cfg.seed, 0);
    std::vector<double> x(x0.begin(), x0.end());

    std::vector<index_t> perm;
    if (cfg.sampling == ParSampling::slice_shuffle) {
        perm.resize(static_cast<std::size_t>(m));
        for (index_t i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
    }

    std::vector<double> shadow;
    index_t increments = 0;
    if (instrument) shadow.assign(static_cast<std::size_t>(n), 0.0);

    Trace trace;
    trace.config_echo = run_config_json(cfg, m, n);
    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&](index_t epoch, index_t updates) -> double {
        const Residuals res = residuals(A, x, b);
        if (!std::isfinite(res.r_sq) || !std::isfinite(res.grad_sq)) {
            fail(ErrorCode::NonFinite,
                 "iterate became non-finite at epoch " + std::to_string(epoch));
        }
        EpochRecord rec;
        rec.epoch_index = epoch;
        rec.r_sq = res.r_sq;
        rec.grad_sq = res.grad_sq;
        if (cfg.x_star || cfg.projector) rec.dist_sq = oracle_dist_sq(cfg, x);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        rec.updates_applied = updates;
        trace.epochs.push_back(rec);
        return res.r_sq;
    };

    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();

    double r_sq = record(0, 0);
    index_t e = 0;
    while (e < cfg.epochs && r_sq > cfg.target_r_sq) {
        const index_t span = std::min(cfg.snapshot_interval, cfg.epochs - e);
        for (index_t s = 0; s < span; ++s) {
            if (cfg.sampling == ParSampling::slice_shuffle) {
                shuffle_in_place(perm, gen);
            }
            for (index_t q = 0; q < m; ++q) {
                const index_t i =
                    cfg.sampling == ParSampling::slice_shuffle
                        ? perm[static_cast<std::size_t>(q)]
                        : static_cast<index_t>(uniform_below(
                              gen, static_cast<std::uint64_t>(m)));
                const double res = detail::stale_residual(A, x, b, i);
                if (cfg.variant == UpdateVariant::full_row) {
                    const double c = detail::row_coef(A, i, cfg.gamma, res);
                    detail::apply_row(A, i, c, x);
                    if (instrument) {
                        for (index_t k = rp[static_cast<std::size_t>(i)];
                             k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
                            shadow[static_cast<std::size_t>(
                                ci[static_cast<std::size_t>(k)])] -=
                                c * vals[static_cast<std::size_t>(k)];
                        }
                        increments += A.row_nnz(i);
                    }
                } else {
                    const index_t theta = A.row_nnz(i);
                    const index_t pick = static_cast<index_t>(uniform_below(
                        gen, static_cast<std::uint64_t>(theta)));
                    const std::size_t slot = static_cast<std::size_t>(
                        rp[static_cast<std::size_t>(i)] + pick);
                    const index_t t = ci[slot];
                    const double delta = -cfg.gamma *
                                         static_cast<double>(theta) *
                                         vals[slot] * res;
                    x[static_cast<std::size_t>(t)] += delta;
                    if (instrument) {
                        shadow[static_cast<std::size_t>(t)] += delta;
                        ++increments;
                    }
                }
            }
        }
        e += span;
        r_sq = record(e, e * m);
    }
    if (instrument) {
        instrument->row_updates = e * m;
        instrument->increments = increments;
        finish_instrument(*instrument, x, x0, shadow);
    }
    trace.final_x = std::move(x);
    return trace;
}

struct Worker {
    std::vector<index_t> slice;       // slice_shuffle row set
    std::vector<double> shadow;       // instrument sums
    index_t increments = 0;
};

} // namespace

Trace solve_parallel(const CsrMatrix& A, std::span<const double> b,
                     std::span<const double> x0, const RunConfig& cfg,
                     InstrumentReport* instrument) {
    validate_config(A, b, x0, cfg);
    if (cfg.threads == 1) return solve_single(A, b, x0, cfg, instrument);

    const index_t m = A.rows();
    const index_t n = A.cols();
    const index_t T = cfg.threads;
    const index_t limit = cfg.epochs * m;

    std::vector<std::atomic<double>> x(static_cast<std::size_t>(n));
    for (index_t t = 0; t < n; ++t) {
        x[static_cast<std::size_t>(t)].store(x0[static_cast<std::size_t>(t)],
                                             std::memory_order_relaxed);
    }
    std::atomic<index_t> counter{0};
    std::atomic<bool> stop{false};

    Trace trace;
    trace.config_echo = run_config_json(cfg, m, n);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<double> snap(static_cast<std::size_t>(n));
    auto take_snapshot = [&]() {
        for (index_t t = 0; t < n; ++t) {
            snap[static_cast<std::size_t>(t)] =
                x[static_cast<std::size_t>(t)].load(std::memory_order_relaxed);
        }
    };
    bool nonfinite = false;
    auto record = [&](index_t epoch, index_t updates) -> double {
        const Residuals res = residuals(A, snap, b);
        if (!std::isfinite(res.r_sq) || !std::isfinite(res.grad_sq)) {
            nonfinite = true;
            return res.r_sq;
        }
        EpochRecord rec;
        rec.epoch_index = epoch;
        rec.r_sq = res.r_sq;
        rec.grad_sq = res.grad_sq;
        if (cfg.x_star || cfg.projector) {
            rec.dist_sq = oracle_dist_sq(cfg, snap);
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        rec.updates_applied = updates;
        trace.epochs.push_back(rec);
        return res.r_sq;
    };

    take_snapshot();
    if (record(0, 0) <= cfg.target_r_sq || nonfinite || cfg.epochs == 0) {
        if (nonfinite) {
            fail(ErrorCode::NonFinite, "initial residual is non-finite");
        }
        trace.final_x = snap;
        if (instrument) {
            instrument->row_updates = 0;
            instrument->increments = 0;
            finish_instrument(*instrument, snap, x0,
                              std::vector<double>(static_cast<std::size_t>(n)));
        }
        return trace;
    }

    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();
    const bool instrumented = instrument != nullptr;

    std::vector<Worker> ctx(static_cast<std::size_t>(T));
    for (index_t w = 0; w < T; ++w) {
        auto& c = ctx[static_cast<std::size_t>(w)];
        if (cfg.sampling == ParSampling::slice_shuffle) {
            const index_t lo = w * m / T;
            const index_t hi = (w + 1) * m / T;
            c.slice.resize(static_cast<std::size_t>(hi - lo));
            for (index_t i = lo; i < hi; ++i) {
                c.slice[static_cast<std::size_t>(i - lo)] = i;
            }
        }
        if (instrumented) c.shadow.assign(static_cast<std::size_t>(n), 0.0);
    }

    auto worker = [&](index_t w) {
        auto& me = ctx[static_cast<std::size_t>(w)];
        auto gen = make_stream(cfg.seed, static_cast<std::uint64_t>(w));
        auto do_update = [&](index_t i) {
            double res = -b[static_cast<std::size_t>(i)];
            for (index_t k = rp[static_cast<std::size_t>(i)];
                 k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
                res += vals[static_cast<std::size_t>(k)] *
                       x[static_cast<std::size_t>(
                             ci[static_cast<std::size_t>(k)])]
                           .load(std::memory_order_relaxed);
            }
            if (cfg.variant == UpdateVariant::full_row) {
                const double nrm = A.row_norm(i);
                const double c = cfg.gamma * res / (nrm * nrm);
                for (index_t k = rp[static_cast<std::size_t>(i)];
                     k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
                    const double delta = -c * vals[static_cast<std::size_t>(k)];
                    const std::size_t t = static_cast<std::size_t>(
                        ci[static_cast<std::size_t>(k)]);
                    atomic_add(x[t], delta);
                    if (instrumented) {
                        me.shadow[t] += delta;
                        ++me.increments;
                    }
                }
            } else {
                const index_t theta = A.row_nnz(i);
                const index_t pick = static_cast<index_t>(
                    uniform_below(gen, static_cast<std::uint64_t>(theta)));
                const std::size_t slot = static_cast<std::size_t>(
                    rp[static_cast<std::size_t>(i)] + pick);
                const std::size_t t = static_cast<std::size_t>(ci[slot]);
                const double delta = -cfg.gamma * static_cast<double>(theta) *
                                     vals[slot] * res;
                atomic_add(x[t], delta);
                if (instrumented) {
                    me.shadow[t] += delta;
                    ++me.increments;
                }
            }
        };
        auto count_and_check = [&]() -> bool {
            if (counter.fetch_add(1, std::memory_order_relaxed) + 1 >= limit) {
                stop.store(true, std::memory_order_relaxed);
                return false;
            }
            return true;
        };
        if (cfg.sampling == ParSampling::slice_shuffle) {
            for (;;) {
                shuffle_in_place(me.slice, gen);
                for (index_t i : me.slice) {
                    if (stop.load(std::memory_order_relaxed)) return;
                    do_update(i);
                    if (!count_and_check()) return;
                }
            }
        } else {
            for (;;) {
                if (stop.load(std::memory_order_relaxed)) return;
                const index_t i = static_cast<index_t>(
                    uniform_below(gen, static_cast<std::uint64_t>(m)));
                do_update(i);
                if (!count_and_check()) return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(T));
    try {
        for (index_t w = 0; w < T; ++w) pool.emplace_back(worker, w);
    } catch (const std::system_error& e) {
        stop.store(true, std::memory_order_relaxed);
        for (auto& th : pool) {
            if (th.joinable()) th.join();
        }
        fail(ErrorCode::ThreadSpawnFailure,
             std::string("could not spawn worker: ") + e.what());
    }

    index_t next_epoch = cfg.snapshot_interval;
    while (!stop.load(std::memory_order_relaxed)) {
        std::this_thread::sleep_for(std::chrono::microseconds(100));
        const index_t c = counter.load(std::memory_order_relaxed);
        const index_t epoch_now = c / m;
        if (epoch_now >= next_epoch) {
            // counter may have raced past several boundaries; report the
            // latest one crossed
            const index_t boundary = std::min(
                cfg.epochs,
                next_epoch + (epoch_now - next_epoch) / cfg.snapshot_interval *
                                 cfg.snapshot_interval);
            take_snapshot();
            const double r_sq = record(boundary, c);
            next_epoch = boundary + cfg.snapshot_interval;
            if (nonfinite || r_sq <= cfg.target_r_sq ||
                next_epoch > cfg.epochs) {
                stop.store(true, std::memory_order_relaxed);
            }
        }
    }
    stop.store(true, std::memory_order_relaxed);
    for (auto& th : pool) th.join();
    if (nonfinite) {
        fail(ErrorCode::NonFinite, "iterate became non-finite");
    }

    // exact terminal measurement with all workers quiesced
    const index_t c_final = counter.load(std::memory_order_relaxed);
    const index_t final_epoch = (c_final + m - 1) / m;
    take_snapshot();
    if (!trace.epochs.empty() &&
        trace.epochs.back().epoch_index >= final_epoch) {
        trace.epochs.pop_back();
    }
    record(final_epoch, c_final);
    if (nonfinite) {
        fail(ErrorCode::NonFinite, "iterate became non-finite");
    }

    if (instrument) {
        std::vector<double> total(static_cast<std::size_t>(n), 0.0);
        index_t increments = 0;
        for (const auto& c : ctx) {
            increments += c.increments;
            if (!c.shadow.empty()) {
                for (std::size_t t = 0; t < total.size(); ++t) {
                    total[t] += c.shadow[t];
                }
            }
        }
        instrument->row_updates = c_final;
        instrument->increments = increments;
        finish_instrument(*instrument, snap, x0, total);
    }
    trace.final_x = snap;
    return trace;
}

SpeedupReport sweep_threads(const CsrMatrix& A, std::span<const double> b,
                            std::span<const double> x0, const RunConfig& cfg,
                            std::span<const index_t> thread_list) {
    if (thread_list.empty()) {
        fail(ErrorCode::InvalidArgument, "thread list is empty");
    }
    if (std::find(thread_list.begin(), thread_list.end(), 1) ==
        thread_list.end()) {
        fail(ErrorCode::InvalidArgument,
             "thread list must contain 1 (the speedup reference)");
    }
    SpeedupReport rep;
    for (index_t t : thread_list) {
        RunConfig c = cfg;
        c.threads = t;
        const Trace tr = solve_parallel(A, b, x0, c);
        SpeedupEntry e;
        e.threads = t;
        e.wall_seconds = tr.epochs.back().wall_seconds;
        e.epochs = tr.epochs.back().epoch_index;
        e.final_r_sq = tr.epochs.back().r_sq;
        rep.entries.push_back(e);
    }
    double wall1 = 0.0;
    for (const auto& e : rep.entries) {
        if (e.threads == 1) {
            wall1 = e.wall_seconds;
            break;
        }
    }
    for (auto& e : rep.entries) {
        e.speedup = e.wall_seconds > 0.0 ? wall1 / e.wall_seconds : 0.0;
    }
    return rep;
}

std::string SpeedupReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json je;
        je["threads"] = e.threads;
        je["wall_seconds"] = e.wall_seconds;
        je["epochs"] = e.epochs;
        je["final_r_sq"] = e.final_r_sq;
        je["speedup"] = e.speedup;
        j.push_back(je);
    }
    return j.dump(2);
}

std::string SpeedupReport::to_csv() const {
    std::string out = "threads,wall_seconds,epochs,final_r_sq,speedup\n";
    for (const auto& e : entries) {
        out += std::to_string(e.threads) + ',' +
               std::to_string(e.wall_seconds) + ',' +
               std::to_string(e.epochs) + ',' + std::to_string(e.final_r_sq) +
               ',' + std::to_string(e.speedup) + '\n';
    }
    return out;
}

} // namespace asyrk

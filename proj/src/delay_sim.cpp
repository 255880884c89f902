#include "asyrk/delay_sim.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "asyrk/error.hpp"
#include "asyrk/rng.hpp"

namespace asyrk {

namespace {

const char* delay_name(DelayModel::Kind k) {
    switch (k) {
        case DelayModel::Kind::fixed: return "fixed";
        case DelayModel::Kind::uniform_random: return "uniform_random";
        case DelayModel::Kind::max_staleness: return "max_staleness";
    }
    return "?";
}

/// Incrementally maintained residual r = Ax - b with running ||r||^2.
/// Exactness is restored by recompute() at epoch boundaries; between them the
/// running sum is float-accurate enough for probe series.
class LiveResidual {
  public:
    LiveResidual(const CsrMatrix& A, std::span<const double> b,
                 std::span<const double> x)
        : csc_(make_csc(A)), b_(b.begin(), b.end()) {
        recompute(A, x);
    }

    void bump(index_t t, double delta) {
        for (index_t k = csc_.col_ptr[static_cast<std::size_t>(t)];
             k < csc_.col_ptr[static_cast<std::size_t>(t) + 1]; ++k) {
            const std::size_t i = static_cast<std::size_t>(
                csc_.row_idx[static_cast<std::size_t>(k)]);
            r_sq_ -= r_[i] * r_[i];
            r_[i] += csc_.values[static_cast<std::size_t>(k)] * delta;
            r_sq_ += r_[i] * r_[i];
        }
    }

    void recompute(const CsrMatrix& A, std::span<const double> x) {
        A.multiply(x, r_);
        r_sq_ = 0.0;
        for (std::size_t i = 0; i < r_.size(); ++i) {
            r_[i] -= b_[i];
            r_sq_ += r_[i] * r_[i];
        }
    }

    double r_sq() const { return r_sq_; }

  private:
    CscView csc_;
    std::vector<double> b_;
    std::vector<double> r_;
    double r_sq_ = 0.0;
};

double plain_dist_sq(std::span<const double> x, const SolutionProjector& p) {
    return p.dist_sq(x);
}

} // namespace

SimRun simulate(const CsrMatrix& A, std::span<const double> b,
                std::span<const double> x0, const StepParams& params,
                const DelayModel& delay, index_t iterations,
                std::uint64_t seed, SimVariant variant,
                const SimOptions& opts) {
    const index_t m = A.rows();
    const index_t n = A.cols();
    if (static_cast<index_t>(b.size()) != m ||
        static_cast<index_t>(x0.size()) != n) {
        fail(ErrorCode::DimensionMismatch, "simulate: b or x0 size mismatch");
    }
    if (!A.is_normalized()) {
        fail(ErrorCode::NotNormalized, "simulate requires normalized rows");
    }
    if (params.gamma < 0.0) {
        fail(ErrorCode::InvalidGamma, "gamma must be >= 0");
    }
    if (iterations < 1) {
        fail(ErrorCode::InvalidArgument, "need at least one iteration");
    }
    if (delay.tau < 0) {
        fail(ErrorCode::InvalidArgument, "tau must be >= 0");
    }
    if (opts.probe_dist_sq && opts.projector == nullptr) {
        fail(ErrorCode::InvalidArgument,
             "probe_dist_sq needs a SolutionProjector");
    }

    const double gamma = params.gamma;
    const index_t tau = delay.tau;
    const index_t ring_len = tau + 1;

    auto gen = make_stream(seed, 0);
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<std::vector<double>> ring(
        static_cast<std::size_t>(ring_len),
        std::vector<double>(static_cast<std::size_t>(n)));
    ring[0] = x;

    SimRun run;
    run.params = params;

    const bool probing = opts.probe_every > 0 &&
                         (opts.probe_r_sq || opts.probe_dist_sq);
    std::unique_ptr<LiveResidual> live;
    if (probing && opts.probe_r_sq) {
        live = std::make_unique<LiveResidual>(A, b, x);
    }
    auto probe = [&](index_t j) {
        run.probe_iteration.push_back(j);
        if (opts.probe_r_sq) run.probe_r_sq.push_back(live->r_sq());
        if (opts.probe_dist_sq) {
            run.probe_dist_sq.push_back(plain_dist_sq(x, *opts.projector));
        }
    };

    {
        nlohmann::json c;
        c["solver"] = "simulate";
        c["m"] = m;
        c["n"] = n;
        c["variant"] = variant == SimVariant::full_row ? "full_row"
                                                       : "single_component";
        c["delay"] = delay_name(delay.kind);
        c["tau"] = tau;
        c["gamma"] = gamma;
        c["iterations"] = iterations;
        c["seed"] = seed;
        run.trace.config_echo = c.dump();
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&](index_t epoch, index_t updates) {
        const Residuals res = residuals(A, x, b);
        if (!std::isfinite(res.r_sq) || !std::isfinite(res.grad_sq)) {
            fail(ErrorCode::NonFinite,
                 "iterate became non-finite at iteration " +
                     std::to_string(updates));
        }
        EpochRecord rec;
        rec.epoch_index = epoch;
        rec.r_sq = res.r_sq;
        rec.grad_sq = res.grad_sq;
        if (opts.projector) rec.dist_sq = opts.projector->dist_sq(x);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        rec.updates_applied = updates;
        run.trace.epochs.push_back(rec);
    };

    record(0, 0);
    if (probing) probe(0);

    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();

    for (index_t j = 0; j < iterations; ++j) {
        const index_t i = static_cast<index_t>(
            uniform_below(gen, static_cast<std::uint64_t>(m)));
        index_t k;
        switch (delay.kind) {
            case DelayModel::Kind::fixed:
                k = std::max<index_t>(0, j - tau);
                break;
            case DelayModel::Kind::uniform_random: {
                const index_t d = static_cast<index_t>(
                    uniform_below(gen, static_cast<std::uint64_t>(tau + 1)));
                k = std::max<index_t>(0, j - d);
                break;
            }
            case DelayModel::Kind::max_staleness:
            default:
                k = std::max<index_t>(0, j - tau);
                break;
        }
        const auto& x_read = ring[static_cast<std::size_t>(k % ring_len)];

        UpdateEvent ev;
        ev.j = j;
        ev.i = i;
        ev.k = k;

        const double res = detail::stale_residual(A, x_read, b, i);
        if (variant == SimVariant::single_component) {
            const index_t theta = A.row_nnz(i);
            const index_t pick = static_cast<index_t>(
                uniform_below(gen, static_cast<std::uint64_t>(theta)));
            const std::size_t slot =
                static_cast<std::size_t>(rp[static_cast<std::size_t>(i)] + pick);
            const index_t t = ci[slot];
            const double delta =
                -gamma * static_cast<double>(theta) * vals[slot] * res;
            x[static_cast<std::size_t>(t)] += delta;
            if (live) live->bump(t, delta);
            ev.t = t;
            ev.step = delta;
        } else {
            const double c = detail::row_coef(A, i, gamma, res);
            detail::apply_row(A, i, c, x);
            if (live) {
                for (index_t q = rp[static_cast<std::size_t>(i)];
                     q < rp[static_cast<std::size_t>(i) + 1]; ++q) {
                    live->bump(ci[static_cast<std::size_t>(q)],
                               -c * vals[static_cast<std::size_t>(q)]);
                }
            }
            ev.t = kAllComponents;
            ev.step = c;
        }
        ring[static_cast<std::size_t>((j + 1) % ring_len)] = x;
        if (static_cast<index_t>(run.events.size()) < opts.max_events) {
            run.events.push_back(ev);
        }

        const index_t done = j + 1;
        if (done % m == 0) {
            record(done / m, done);
            if (live) live->recompute(A, x);  // cancel accumulation drift
        }
        if (probing && done % opts.probe_every == 0) probe(done);
    }
    if (iterations % m != 0) {
        record(iterations / m + 1, iterations);
    }

    const index_t kept = std::min<index_t>(ring_len, iterations + 1);
    run.history.reserve(static_cast<std::size_t>(kept));
    for (index_t idx = iterations - kept + 1; idx <= iterations; ++idx) {
        run.history.push_back(ring[static_cast<std::size_t>(idx % ring_len)]);
    }
    run.trace.final_x = std::move(x);
    return run;
}

MonteCarloRatios monte_carlo_ratios(const CsrMatrix& A,
                                    std::span<const double> b,
                                    std::span<const double> x0,
                                    const StepParams& params,
                                    const DelayModel& delay, index_t iterations,
                                    index_t runs, std::uint64_t base_seed,
                                    SimVariant variant) {
    if (runs < 100) {
        fail(ErrorCode::InsufficientData,
             "need >= 100 runs for stable ratio estimates");
    }
    SimOptions opts;
    opts.probe_every = 1;
    opts.probe_r_sq = true;

    MonteCarloRatios out;
    out.mean_r_sq.assign(static_cast<std::size_t>(iterations) + 1, 0.0);
    for (index_t r = 0; r < runs; ++r) {
        const SimRun run = simulate(A, b, x0, params, delay, iterations,
                                    base_seed + static_cast<std::uint64_t>(r),
                                    variant, opts);
        // probes land at every iteration including 0
        for (std::size_t j = 0; j < out.mean_r_sq.size(); ++j) {
            out.mean_r_sq[j] += run.probe_r_sq[j];
        }
    }
    const double inv = 1.0 / static_cast<double>(runs);
    for (double& v : out.mean_r_sq) v *= inv;

    out.ratios.resize(out.mean_r_sq.size() - 1);
    for (std::size_t j = 0; j + 1 < out.mean_r_sq.size(); ++j) {
        const double a = out.mean_r_sq[j];
        const double c = out.mean_r_sq[j + 1];
        if (a == 0.0) {
            out.ratios[j] = c == 0.0 ? 1.0
                                     : std::numeric_limits<double>::infinity();
        } else {
            out.ratios[j] = c / a;
        }
    }
    return out;
}

RateFit rate_fit(std::span<const double> y, double stride) {
    if (y.size() < 20) {
        fail(ErrorCode::InsufficientData, "rate_fit needs >= 20 points");
    }
    if (!(stride > 0.0)) {
        fail(ErrorCode::InvalidArgument, "stride must be positive");
    }
    const std::size_t n = y.size();
    std::vector<double> ly(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(y[k] > 0.0)) {
            fail(ErrorCode::NonPositiveData,
                 "rate_fit needs strictly positive values (index " +
                     std::to_string(k) + ")");
        }
        ly[k] = std::log(y[k]);
    }
    // shift by the first value: slope and r2 are shift-invariant, and a
    // constant series then has exactly zero variance instead of rounding dust
    const double shift = ly[0];
    for (double& v : ly) v -= shift;
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sx += static_cast<double>(k);
        sy += ly[k];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = static_cast<double>(k) - mx;
        const double dy = ly[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    RateFit fit;
    const double slope_per_index = sxy / sxx;
    fit.slope = slope_per_index / stride;
    if (syy == 0.0) {
        fit.r2 = 1.0;  // constant series: the zero-slope line is exact
    } else {
        const double ss_res = syy - sxy * sxy / sxx;
        fit.r2 = 1.0 - ss_res / syy;
    }
    return fit;
}

} // namespace asyrk

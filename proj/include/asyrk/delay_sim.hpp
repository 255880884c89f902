#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "asyrk/dense.hpp"
#include "asyrk/kaczmarz.hpp"
#include "asyrk/stepsize.hpp"
#include "asyrk/trace.hpp"

namespace asyrk {

/// Staleness model producing the read index k(j) for iteration j, always
/// inside [max(0, j - tau), j]. The theory only bounds the delay; the three
/// kinds pin it down for experiments, with max_staleness as the adversarial
/// choice.
struct DelayModel {
    enum class Kind { fixed, uniform_random, max_staleness };
    Kind kind = Kind::fixed;
    index_t tau = 0;

    static DelayModel fixed(index_t d) { return {Kind::fixed, d}; }
    static DelayModel uniform_random(index_t tau) {
        return {Kind::uniform_random, tau};
    }
    static DelayModel max_staleness(index_t tau) {
        return {Kind::max_staleness, tau};
    }
};

using SimVariant = UpdateVariant;

struct SimOptions {
    /// Record series every `probe_every` iterations (0 disables), starting at
    /// iteration 0 (the initial state).
    index_t probe_every = 0;
    bool probe_r_sq = false;
    bool probe_dist_sq = false;
    /// Distance oracle for probe_dist_sq and per-epoch trace records.
    const SolutionProjector* projector = nullptr;
    /// Cap on retained UpdateEvent entries (audit log); 0 keeps none.
    index_t max_events = 0;
};

struct SimRun {
    Trace trace;          // one record per epoch boundary (epoch = m iterations)
    StepParams params;    // echo of the step parameters used
    std::vector<UpdateEvent> events;
    /// Final ring-buffer contents: the last min(tau+1, K+1) iterates in
    /// ascending iterate order.
    std::vector<std::vector<double>> history;
    std::vector<index_t> probe_iteration;
    std::vector<double> probe_r_sq;
    std::vector<double> probe_dist_sq;
};

/// Single-threaded, deterministic replay of the asynchronous recursion
/// x_{j+1} = x_j - gamma*theta_i*P_t*a_i*(a_i^T x_{k(j)} - b_i) with k(j)
/// from the delay model (clipped to 0 during warm-up). full_row applies the
/// damped projection x -= gamma*(a_i^T x_read - b_i)/||a_i||^2 * a_i from the
/// same stale read. Draw order per iteration: row, then delay (uniform_random
/// only), then component (single_component only). gamma = 0 freezes the
/// iterate and is allowed; negative gamma is InvalidGamma.
SimRun simulate(const CsrMatrix& A, std::span<const double> b,
                std::span<const double> x0, const StepParams& params,
                const DelayModel& delay, index_t iterations,
                std::uint64_t seed, SimVariant variant,
                const SimOptions& opts = {});

struct MonteCarloRatios {
    std::vector<double> mean_r_sq;  // indexed by iteration 0..K
    std::vector<double> ratios;     // ratios[j] = mean_r_sq[j+1]/mean_r_sq[j]
};

/// Sample mean of ||Ax_j - b||^2 over `runs` independent simulations (run r
/// uses seed base_seed + r) and the consecutive ratios the ratio-bound
/// theorem constrains to [1/rho, rho].
MonteCarloRatios monte_carlo_ratios(const CsrMatrix& A,
                                    std::span<const double> b,
                                    std::span<const double> x0,
                                    const StepParams& params,
                                    const DelayModel& delay, index_t iterations,
                                    index_t runs, std::uint64_t base_seed,
                                    SimVariant variant = SimVariant::single_component);

struct RateFit {
    double slope = 0.0;  // d log(y) per iteration
    double r2 = 0.0;
};

/// Least-squares fit of log(y[k]) against k*stride. Requires >= 20 points
/// (InsufficientData) and positive values (NonPositiveData).
RateFit rate_fit(std::span<const double> y, double stride = 1.0);

} // namespace asyrk

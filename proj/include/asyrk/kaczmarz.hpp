#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "asyrk/csr.hpp"
#include "asyrk/dense.hpp"
#include "asyrk/rng.hpp"
#include "asyrk/trace.hpp"

namespace asyrk {

/// Sentinel component index for events that touch the whole row support.
inline constexpr index_t kAllComponents = -1;

/// What one update event touches: a single component of supp(a_i) with the
/// theta-weighted increment, or the whole support with the damped projection.
enum class UpdateVariant { single_component, full_row };

struct UpdateEvent {
    index_t j = 0;     // iteration index
    index_t i = 0;     // selected row
    index_t t = kAllComponents;  // selected component, kAllComponents for row
    index_t k = 0;     // iterate index the residual was read from
    double step = 0.0; // single component: the applied increment;
                       // whole row: the common multiplier c in x_t -= c*(a_i)_t
};

/// Walker alias sampler over a fixed nonnegative weight vector.
class AliasTable {
  public:
    explicit AliasTable(std::span<const double> weights);
    index_t sample(std::mt19937_64& gen) const;
    index_t size() const { return static_cast<index_t>(prob_.size()); }

  private:
    std::vector<double> prob_;
    std::vector<index_t> alias_;
};

namespace detail {

/// a_i^T x - b_i, accumulated in CSR storage order. Every solver and the
/// simulator funnel through this and row_coef so that single-thread runs of
/// different drivers produce bit-identical iterates.
inline double stale_residual(const CsrMatrix& A, std::span<const double> x,
                             std::span<const double> b, index_t i) {
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();
    double s = 0.0;
    for (index_t k = rp[static_cast<std::size_t>(i)];
         k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
        s += vals[static_cast<std::size_t>(k)] *
             x[static_cast<std::size_t>(ci[static_cast<std::size_t>(k)])];
    }
    return s - b[static_cast<std::size_t>(i)];
}

/// Common multiplier of the damped row projection x -= c * a_i.
inline double row_coef(const CsrMatrix& A, index_t i, double gamma,
                       double residual) {
    const double nrm = A.row_norm(i);
    return gamma * residual / (nrm * nrm);
}

/// Applies x -= c * a_i in CSR storage order.
inline void apply_row(const CsrMatrix& A, index_t i, double c,
                      std::span<double> x) {
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();
    for (index_t k = rp[static_cast<std::size_t>(i)];
         k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
        x[static_cast<std::size_t>(ci[static_cast<std::size_t>(k)])] -=
            c * vals[static_cast<std::size_t>(k)];
    }
}

} // namespace detail

/// One Kaczmarz step: projects x onto the hyperplane a_i^T z = b_i.
/// Only components in supp(a_i) change.
std::vector<double> rk_step(const CsrMatrix& A, std::span<const double> b,
                            std::span<const double> x, index_t i);

enum class Sampling {
    uniform,            // rows equiprobable; requires normalized A
    norm_proportional,  // P(i) proportional to ||a_i||^2, alias table
    shuffle,            // per-epoch random permutation, each row once
};

struct RkConfig {
    index_t max_epochs = 100;
    double target_r_sq = 0.0;
    std::uint64_t seed = 0;
    Sampling sampling = Sampling::uniform;
    // Either source enables dist_sq in the trace; x_star wins when both set.
    const std::vector<double>* x_star = nullptr;
    const SolutionProjector* projector = nullptr;
};

/// Serial randomized Kaczmarz: m row projections per epoch, one trace record
/// per epoch boundary (record 0 is the initial state), stop on max_epochs or
/// r_sq <= target_r_sq. Identical seed gives a bit-identical trace.
Trace rk_solve(const CsrMatrix& A, std::span<const double> b,
               std::span<const double> x0, const RkConfig& cfg);

/// Single-component update increment of the asynchronous scheme:
/// delta = -gamma * theta_i * (a_i)_t * (a_i^T x_read - b_i).
/// Pure; the caller adds delta to component t of the live vector.
double asyrk_update(const CsrMatrix& A, std::span<const double> b, index_t i,
                    index_t t, double gamma, std::span<const double> x_read);

/// Euclidean projection of x onto {z : Az = b}. Convenience wrapper that
/// builds a dense SolutionProjector per call; hold one directly for repeated
/// projections.
std::vector<double> project_solution_set(const CsrMatrix& A,
                                         std::span<const double> b,
                                         std::span<const double> x);

} // namespace asyrk

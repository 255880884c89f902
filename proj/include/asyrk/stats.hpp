#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asyrk/csr.hpp"

namespace asyrk {

/// Structural and spectral scalars of a row-normalized A, as consumed by the
/// step-size theory. lambda_min/sigma_r come from a dense SVD and are only
/// present when exact_spectral was requested (or supplied by the caller);
/// lambda_max falls back to power iteration on A^T A otherwise.
struct SystemStats {
    index_t m = 0;
    index_t n = 0;
    double delta = 0.0;              // nnz / (m*n)
    std::vector<index_t> theta;      // per-row nonzero counts
    index_t mu = 0;                  // max_i theta_i
    index_t nu = 0;                  // max column nonzero count
    double alpha = 0.0;              // max_{i,t} ||A theta_i P_t a_i||
    std::optional<double> lambda_min;
    double lambda_max = 0.0;
    double frob_sq = 0.0;
    double l_max = 0.0;              // max diagonal entry of A^T A
    double l_res = 0.0;              // max row norm of A^T A
    std::optional<double> sigma_r;   // smallest nonzero singular value

    std::string to_json() const;
    static SystemStats from_json(const std::string& text);
};

struct StatsOptions {
    bool exact_spectral = true;
    double tol = 1e-9;          // power-iteration relative tolerance
    index_t max_power_iters = 200000;
};

/// Throws NotNormalized unless A carries the normalized flag: every stat here
/// feeds theory that assumes unit rows.
SystemStats compute_stats(const CsrMatrix& A, const StatsOptions& opts = {});

/// Largest eigenvalue of A^T A by power iteration (deterministic start
/// vector). Throws PowerIterationDiverged past the iteration cap.
double power_iteration_lambda_max(const CsrMatrix& A, double tol,
                                  index_t max_iters);

} // namespace asyrk

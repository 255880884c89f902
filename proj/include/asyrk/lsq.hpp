#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "asyrk/csr.hpp"
#include "asyrk/kaczmarz.hpp"
#include "asyrk/trace.hpp"

namespace asyrk {

/// Square consistent encoding of the least-squares problem:
/// [0 phi*A^T; A -zeta*I] (x; y) = (phi*A^T b; 0), shape (n+m) x (n+m).
/// Rows are normalized for the uniform-sampling solvers, with b_tilde scaled
/// identically (the solution set is unchanged); row_scales holds the original
/// row norms, so sum(row_scales^2) = (1+phi^2)*||A||_F^2 + m*zeta^2.
struct AugmentedSystem {
    CsrMatrix a_tilde;
    std::vector<double> b_tilde;
    double zeta = 0.0;
    double phi = 0.0;
    std::vector<double> row_scales;
};

/// (phi*, zeta*) = (1, sigma_r/sqrt(2)), the maximizer of the critical ratio.
std::pair<double, double> optimal_params(double sigma_r);

/// min{zeta, -zeta/2 + sqrt(zeta^2 + 4*phi*sigma_r^2)/2}^2
///   / ((1+phi^2)*frob_sq + m*zeta^2),
/// the smallest nonzero eigenvalue of the augmented Gram matrix over its
/// Frobenius mass; the quantity the (zeta, phi) choice maximizes.
double critical_ratio(double sigma_r, double frob_sq, index_t m, double zeta,
                      double phi);

/// Build the augmented system from a normalized A. A zero column would give
/// an all-zero row in the top block and is rejected (drop that variable).
AugmentedSystem augment(const CsrMatrix& A, std::span<const double> b,
                        double zeta, double phi);

struct LsqConfig {
    // 0 means "use the optimal value derived from sigma_r".
    double zeta = 0.0;
    double phi = 0.0;
    // Supplied sigma_r skips the dense SVD (mandatory above the dense cap).
    std::optional<double> sigma_r;
    index_t max_epochs = 5000;
    double target_r_sq = 0.0;   // stop threshold on the augmented residual
    std::uint64_t seed = 0;
    Sampling sampling = Sampling::uniform;
};

struct LsqResult {
    std::vector<double> x_ls;   // recovered least-squares solution x_hat/zeta
    std::vector<double> y;      // auxiliary block of the augmented solution
    Trace trace;                // of the augmented solve
    double grad_norm = 0.0;     // ||A^T (A x_ls - b)|| at the returned x_ls
    double zeta = 0.0;
    double phi = 0.0;
    double sigma_r = 0.0;
};

/// Solve min ||Ax - b|| by running the row-projection solver on the
/// augmented system. The first n components of the augmented solution equal
/// zeta * x_ls, hence the division on extraction.
LsqResult lsq_solve(const CsrMatrix& A, std::span<const double> b,
                    const LsqConfig& cfg);

} // namespace asyrk

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "asyrk/csr.hpp"

namespace asyrk {

/// Dense SVD-derived quantities of A. Singular values below
/// 1e-10 * sigma_max are treated as zero when locating the smallest
/// nonzero one.
struct Spectrum {
    double lambda_max;  // largest eigenvalue of A^T A
    double lambda_min;  // smallest nonzero eigenvalue of A^T A
    double sigma_r;     // sqrt(lambda_min)
    int rank;
};

Spectrum dense_spectrum(const CsrMatrix& A);

/// Euclidean projector onto the solution set {z : Az = b}, backed by a dense
/// SVD of A computed once at construction. Desk scale only: construction
/// throws TooLarge when m*n exceeds max_dense_elements.
class SolutionProjector {
  public:
    static constexpr index_t kDefaultDenseCap = 4'000'000;

    SolutionProjector(const CsrMatrix& A, std::vector<double> b,
                      index_t max_dense_elements = kDefaultDenseCap);

    /// x - A^+(Ax - b). Throws Inconsistent when the projected point does
    /// not satisfy Az = b to tolerance (i.e. b is not in range(A)).
    std::vector<double> project(std::span<const double> x) const;

    /// ||x - project(x)||^2 without the consistency check; used for
    /// distance-to-solution traces.
    double dist_sq(std::span<const double> x) const;

    const Spectrum& spectrum() const { return spectrum_; }

  private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    std::vector<double> b_;
    Spectrum spectrum_;
};

/// Minimum-norm least-squares solution of Ax = b via dense SVD.
std::vector<double> dense_min_norm_lstsq(const CsrMatrix& A,
                                         std::span<const double> b);

std::vector<std::vector<double>> to_dense(const CsrMatrix& A);

} // namespace asyrk

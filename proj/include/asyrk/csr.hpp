#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asyrk/error.hpp"

namespace asyrk {

using index_t = std::int64_t;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Row-compressed sparse matrix. Immutable after construction; safe to share
/// across threads by reference. Per-row Euclidean norms are cached at build
/// time. `normalized` is only set by normalize_rows() or flag_normalized(),
/// both of which verify |row_norm - 1| <= kNormTol on every row.
class CsrMatrix {
  public:
    static constexpr double kNormTol = 1e-12;

    CsrMatrix() = default;

    /// Build from coordinate triplets. Indices must be in range, duplicates
    /// are rejected (summing them would silently alter sparsity statistics),
    /// and every row must end up with at least one structural nonzero.
    static CsrMatrix from_triplets(std::span<const Triplet> entries,
                                   index_t m, index_t n);

    index_t rows() const { return m_; }
    index_t cols() const { return n_; }
    index_t nnz() const { return static_cast<index_t>(values_.size()); }
    bool is_normalized() const { return normalized_; }

    const std::vector<index_t>& row_ptr() const { return row_ptr_; }
    const std::vector<index_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& row_norm() const { return row_norm_; }
    double row_norm(index_t i) const { return row_norm_[i]; }

    index_t row_nnz(index_t i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

    /// a_i . x over the row's nonzeros, accumulated in storage order.
    double row_dot(index_t i, std::span<const double> x) const;

    /// Dense y = A x (y resized to m).
    void multiply(std::span<const double> x, std::vector<double>& y) const;

    /// Dense y = A^T x (y resized to n).
    void multiply_transpose(std::span<const double> x, std::vector<double>& y) const;

    std::vector<Triplet> to_triplets() const;

    /// Marks the matrix normalized after verifying all cached row norms are
    /// within kNormTol of 1 (throws NotNormalized otherwise). Used when a
    /// matrix known to be normalized is re-read from disk.
    void flag_normalized();

  private:
    friend std::pair<CsrMatrix, std::vector<double>>
    normalize_rows(const CsrMatrix&, std::span<const double>);

    index_t m_ = 0;
    index_t n_ = 0;
    std::vector<index_t> row_ptr_;
    std::vector<index_t> col_idx_;
    std::vector<double> values_;
    std::vector<double> row_norm_;
    bool normalized_ = false;
};

/// Scale each row (and the matching b entry) by 1/||a_i||. The solution set
/// of Ax=b is unchanged. Throws ZeroRow if any row norm is zero.
std::pair<CsrMatrix, std::vector<double>>
normalize_rows(const CsrMatrix& A, std::span<const double> b);

struct Residuals {
    std::vector<double> r; // Ax - b
    double r_sq;           // ||Ax - b||^2
    double grad_sq;        // ||A^T (Ax - b)||^2
};

Residuals residuals(const CsrMatrix& A, std::span<const double> x,
                    std::span<const double> b);

/// Column-compressed view of a CsrMatrix (row indices per column, same
/// values). Built on demand; the simulator uses it to maintain residuals
/// incrementally and compute_stats uses it for column statistics.
struct CscView {
    index_t m = 0;
    index_t n = 0;
    std::vector<index_t> col_ptr;
    std::vector<index_t> row_idx;
    std::vector<double> values;
};

CscView make_csc(const CsrMatrix& A);

/// Per-column Euclidean norms ||a-bar_t||, one pass over the nonzeros.
std::vector<double> column_norms(const CsrMatrix& A);

} // namespace asyrk

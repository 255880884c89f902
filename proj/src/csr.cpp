#include "asyrk/csr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace asyrk {

CsrMatrix CsrMatrix::from_triplets(std::span<const Triplet> entries,
                                   index_t m, index_t n) {
    if (m < 1 || n < 1)
        fail(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n)
            fail(ErrorCode::IndexOutOfRange,
                 "triplet (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                     ") outside " + std::to_string(m) + "x" + std::to_string(n));
    }

    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = entries[a];
        const auto& tb = entries[b];
        return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
    });

    CsrMatrix A;
    A.m_ = m;
    A.n_ = n;
    A.row_ptr_.assign(static_cast<std::size_t>(m) + 1, 0);
    A.col_idx_.reserve(entries.size());
    A.values_.reserve(entries.size());

    index_t prev_row = -1, prev_col = -1;
    for (std::size_t k : order) {
        const auto& e = entries[k];
        if (e.row == prev_row && e.col == prev_col)
            fail(ErrorCode::DuplicateEntry,
                 "duplicate entry at (" + std::to_string(e.row) + "," +
                     std::to_string(e.col) + ")");
        if (e.value != 0.0) {
            A.col_idx_.push_back(e.col);
            A.values_.push_back(e.value);
            ++A.row_ptr_[static_cast<std::size_t>(e.row) + 1];
        }
        prev_row = e.row;
        prev_col = e.col;
    }
    for (index_t i = 0; i < m; ++i)
        A.row_ptr_[static_cast<std::size_t>(i) + 1] += A.row_ptr_[static_cast<std::size_t>(i)];

    A.row_norm_.resize(static_cast<std::size_t>(m));
    for (index_t i = 0; i < m; ++i) {
        if (A.row_nnz(i) == 0)
            fail(ErrorCode::ZeroRow, "row " + std::to_string(i) + " has no nonzeros");
        double s = 0.0;
        for (index_t k = A.row_ptr_[i]; k < A.row_ptr_[i + 1]; ++k)
            s += A.values_[k] * A.values_[k];
        A.row_norm_[static_cast<std::size_t>(i)] = std::sqrt(s);
    }
    return A;
}

double CsrMatrix::row_dot(index_t i, std::span<const double> x) const {
    double s = 0.0;
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        s += values_[k] * x[static_cast<std::size_t>(col_idx_[k])];
    return s;
}

void CsrMatrix::multiply(std::span<const double> x, std::vector<double>& y) const {
    if (static_cast<index_t>(x.size()) != n_)
        fail(ErrorCode::DimensionMismatch, "multiply: x has wrong length");
    y.assign(static_cast<std::size_t>(m_), 0.0);
    for (index_t i = 0; i < m_; ++i)
        y[static_cast<std::size_t>(i)] = row_dot(i, x);
}

void CsrMatrix::multiply_transpose(std::span<const double> x,
                                   std::vector<double>& y) const {
    if (static_cast<index_t>(x.size()) != m_)
        fail(ErrorCode::DimensionMismatch, "multiply_transpose: x has wrong length");
    y.assign(static_cast<std::size_t>(n_), 0.0);
    for (index_t i = 0; i < m_; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        if (xi == 0.0)
            continue;
        for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            y[static_cast<std::size_t>(col_idx_[k])] += values_[k] * xi;
    }
}

std::vector<Triplet> CsrMatrix::to_triplets() const {
    std::vector<Triplet> out;
    out.reserve(values_.size());
    for (index_t i = 0; i < m_; ++i)
        for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            out.push_back({i, col_idx_[k], values_[k]});
    return out;
}

void CsrMatrix::flag_normalized() {
    for (index_t i = 0; i < m_; ++i)
        if (std::abs(row_norm_[static_cast<std::size_t>(i)] - 1.0) > kNormTol)
            fail(ErrorCode::NotNormalized,
                 "row " + std::to_string(i) + " norm " +
                     std::to_string(row_norm_[static_cast<std::size_t>(i)]) +
                     " not within 1e-12 of 1");
    normalized_ = true;
}

std::pair<CsrMatrix, std::vector<double>>
normalize_rows(const CsrMatrix& A, std::span<const double> b) {
    if (!b.empty() && static_cast<index_t>(b.size()) != A.rows())
        fail(ErrorCode::DimensionMismatch, "normalize_rows: b has wrong length");

    CsrMatrix N = A;
    std::vector<double> nb(b.begin(), b.end());
    for (index_t i = 0; i < A.rows(); ++i) {
        const double nrm = A.row_norm()[static_cast<std::size_t>(i)];
        if (nrm == 0.0)
            fail(ErrorCode::ZeroRow, "row " + std::to_string(i) + " has zero norm");
        // rows already at unit norm are left bit-identical (idempotence)
        if (std::abs(nrm - 1.0) <= CsrMatrix::kNormTol) continue;
        for (index_t k = N.row_ptr_[i]; k < N.row_ptr_[i + 1]; ++k)
            N.values_[k] /= nrm;
        if (!nb.empty())
            nb[static_cast<std::size_t>(i)] /= nrm;
        // recompute rather than assume exactly 1
        double s = 0.0;
        for (index_t k = N.row_ptr_[i]; k < N.row_ptr_[i + 1]; ++k)
            s += N.values_[k] * N.values_[k];
        N.row_norm_[static_cast<std::size_t>(i)] = std::sqrt(s);
    }
    N.flag_normalized();
    return {std::move(N), std::move(nb)};
}

Residuals residuals(const CsrMatrix& A, std::span<const double> x,
                    std::span<const double> b) {
    if (static_cast<index_t>(x.size()) != A.cols() ||
        static_cast<index_t>(b.size()) != A.rows())
        fail(ErrorCode::DimensionMismatch, "residuals: dimension mismatch");

    Residuals out;
    out.r.resize(static_cast<std::size_t>(A.rows()));
    out.r_sq = 0.0;
    for (index_t i = 0; i < A.rows(); ++i) {
        const double ri = A.row_dot(i, x) - b[static_cast<std::size_t>(i)];
        out.r[static_cast<std::size_t>(i)] = ri;
        out.r_sq += ri * ri;
    }
    std::vector<double> g;
    A.multiply_transpose(out.r, g);
    out.grad_sq = 0.0;
    for (double v : g)
        out.grad_sq += v * v;
    return out;
}

CscView make_csc(const CsrMatrix& A) {
    CscView C;
    C.m = A.rows();
    C.n = A.cols();
    C.col_ptr.assign(static_cast<std::size_t>(A.cols()) + 1, 0);
    C.row_idx.resize(static_cast<std::size_t>(A.nnz()));
    C.values.resize(static_cast<std::size_t>(A.nnz()));

    for (index_t k = 0; k < A.nnz(); ++k)
        ++C.col_ptr[static_cast<std::size_t>(A.col_idx()[k]) + 1];
    for (index_t j = 0; j < A.cols(); ++j)
        C.col_ptr[static_cast<std::size_t>(j) + 1] += C.col_ptr[static_cast<std::size_t>(j)];

    std::vector<index_t> cursor(C.col_ptr.begin(), C.col_ptr.end() - 1);
    for (index_t i = 0; i < A.rows(); ++i) {
        for (index_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k) {
            const index_t j = A.col_idx()[k];
            const index_t dst = cursor[static_cast<std::size_t>(j)]++;
            C.row_idx[static_cast<std::size_t>(dst)] = i;
            C.values[static_cast<std::size_t>(dst)] = A.values()[k];
        }
    }
    return C;
}

std::vector<double> column_norms(const CsrMatrix& A) {
    std::vector<double> sq(static_cast<std::size_t>(A.cols()), 0.0);
    for (index_t k = 0; k < A.nnz(); ++k)
        sq[static_cast<std::size_t>(A.col_idx()[k])] += A.values()[k] * A.values()[k];
    for (double& v : sq)
        v = std::sqrt(v);
    return sq;
}

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::DuplicateEntry: return "DuplicateEntry";
        case ErrorCode::ZeroRow: return "ZeroRow";
        case ErrorCode::ZeroColumn: return "ZeroColumn";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::PowerIterationDiverged: return "PowerIterationDiverged";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::ComponentNotInSupport: return "ComponentNotInSupport";
        case ErrorCode::Inconsistent: return "Inconsistent";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::InvalidRho: return "InvalidRho";
        case ErrorCode::MissingStats: return "MissingStats";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::ZeroLambdaMin: return "ZeroLambdaMin";
        case ErrorCode::InvalidGamma: return "InvalidGamma";
        case ErrorCode::NonPositiveData: return "NonPositiveData";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
        case ErrorCode::SigmaUnavailable: return "SigmaUnavailable";
        case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
        case ErrorCode::ThreadSpawnFailure: return "ThreadSpawnFailure";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace asyrk

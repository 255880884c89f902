#include "asyrk/dense.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>

namespace asyrk {

namespace {

constexpr double kRankCutoff = 1e-10;

Eigen::MatrixXd to_eigen(const CsrMatrix& A) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (index_t i = 0; i < A.rows(); ++i)
        for (index_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
            D(i, A.col_idx()[k]) = A.values()[k];
    return D;
}

struct SvdParts {
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    Eigen::VectorXd sigma;
    int rank;
};

SvdParts decompose(const CsrMatrix& A) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(to_eigen(A),
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdParts p;
    p.U = svd.matrixU();
    p.V = svd.matrixV();
    p.sigma = svd.singularValues();
    const double cutoff = p.sigma.size() > 0 ? kRankCutoff * p.sigma(0) : 0.0;
    p.rank = 0;
    for (Eigen::Index k = 0; k < p.sigma.size(); ++k)
        if (p.sigma(k) > cutoff)
            ++p.rank;
    return p;
}

Spectrum spectrum_of(const SvdParts& p) {
    Spectrum s;
    s.lambda_max = p.sigma.size() > 0 ? p.sigma(0) * p.sigma(0) : 0.0;
    s.sigma_r = p.rank > 0 ? p.sigma(p.rank - 1) : 0.0;
    s.lambda_min = s.sigma_r * s.sigma_r;
    s.rank = p.rank;
    return s;
}

// x + V_r diag(1/sigma_r) U_r^T rhs, the pseudoinverse applied to rhs
Eigen::VectorXd pinv_apply(const SvdParts& p, const Eigen::VectorXd& rhs) {
    Eigen::VectorXd c = p.U.leftCols(p.rank).transpose() * rhs;
    for (int k = 0; k < p.rank; ++k)
        c(k) /= p.sigma(k);
    return p.V.leftCols(p.rank) * c;
}

} // namespace

Spectrum dense_spectrum(const CsrMatrix& A) {
    return spectrum_of(decompose(A));
}

struct SolutionProjector::Impl {
    SvdParts svd;
    Eigen::VectorXd b;
};

SolutionProjector::SolutionProjector(const CsrMatrix& A, std::vector<double> b,
                                     index_t max_dense_elements) {
    if (A.rows() * A.cols() > max_dense_elements)
        fail(ErrorCode::TooLarge,
             "dense projection oracle capped at " +
                 std::to_string(max_dense_elements) + " elements");
    if (static_cast<index_t>(b.size()) != A.rows())
        fail(ErrorCode::DimensionMismatch, "projector: b has wrong length");
    auto impl = std::make_shared<Impl>();
    impl->svd = decompose(A);
    impl->b = Eigen::Map<const Eigen::VectorXd>(b.data(),
                                                static_cast<Eigen::Index>(b.size()));
    spectrum_ = spectrum_of(impl->svd);
    b_ = std::move(b);
    impl_ = std::move(impl);
}

std::vector<double> SolutionProjector::project(std::span<const double> x) const {
    const auto& svd = impl_->svd;
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    // residual in row space only: A z = b requires b in range(A)
    Eigen::VectorXd r = svd.U.leftCols(svd.rank) *
                            (svd.U.leftCols(svd.rank).transpose() * impl_->b) -
                        impl_->b;
    const double bnorm = impl_->b.norm();
    if (r.norm() > 1e-8 * std::max(1.0, bnorm))
        fail(ErrorCode::Inconsistent, "b is not in range(A); system inconsistent");

    // z = x - A^+ (A x - b), with A x formed as U_r (S_r (V_r^T x))
    Eigen::VectorXd t = svd.V.leftCols(svd.rank).transpose() * xv;
    for (int k = 0; k < svd.rank; ++k)
        t(k) *= svd.sigma(k);
    Eigen::VectorXd ax = svd.U.leftCols(svd.rank) * t;
    Eigen::VectorXd z = xv - pinv_apply(svd, ax - impl_->b);
    return std::vector<double>(z.data(), z.data() + z.size());
}

double SolutionProjector::dist_sq(std::span<const double> x) const {
    const auto& svd = impl_->svd;
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd t = svd.V.leftCols(svd.rank).transpose() * xv;
    for (int k = 0; k < svd.rank; ++k)
        t(k) *= svd.sigma(k);
    Eigen::VectorXd ax = svd.U.leftCols(svd.rank) * t;
    Eigen::VectorXd corr = pinv_apply(svd, ax - impl_->b);
    return corr.squaredNorm();
}

std::vector<double> dense_min_norm_lstsq(const CsrMatrix& A,
                                         std::span<const double> b) {
    if (static_cast<index_t>(b.size()) != A.rows())
        fail(ErrorCode::DimensionMismatch, "lstsq: b has wrong length");
    SvdParts svd = decompose(A);
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = pinv_apply(svd, bv);
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<std::vector<double>> to_dense(const CsrMatrix& A) {
    std::vector<std::vector<double>> D(
        static_cast<std::size_t>(A.rows()),
        std::vector<double>(static_cast<std::size_t>(A.cols()), 0.0));
    for (index_t i = 0; i < A.rows(); ++i)
        for (index_t k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
            D[static_cast<std::size_t>(i)][static_cast<std::size_t>(A.col_idx()[k])] =
                A.values()[k];
    return D;
}

} // namespace asyrk

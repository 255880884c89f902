#include "asyrk/lsq.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "asyrk/dense.hpp"
#include "asyrk/error.hpp"

namespace asyrk {

std::pair<double, double> optimal_params(double sigma_r) {
    if (!(sigma_r > 0.0)) {
        fail(ErrorCode::NonPositiveSigma,
             "the smallest nonzero singular value must be positive");
    }
    return {1.0, sigma_r / std::sqrt(2.0)};
}

double critical_ratio(double sigma_r, double frob_sq, index_t m, double zeta,
                      double phi) {
    if (!(sigma_r > 0.0) || !(frob_sq > 0.0) || m < 1 || !(zeta > 0.0) ||
        !(phi > 0.0)) {
        fail(ErrorCode::InvalidArgument,
             "critical_ratio needs positive inputs");
    }
    const double balanced =
        -zeta / 2.0 +
        std::sqrt(zeta * zeta + 4.0 * phi * sigma_r * sigma_r) / 2.0;
    const double lam = std::min(zeta, balanced);
    return lam * lam / ((1.0 + phi * phi) * frob_sq +
                        static_cast<double>(m) * zeta * zeta);
}

AugmentedSystem augment(const CsrMatrix& A, std::span<const double> b,
                        double zeta, double phi) {
    const index_t m = A.rows();
    const index_t n = A.cols();
    if (static_cast<index_t>(b.size()) != m) {
        fail(ErrorCode::DimensionMismatch, "augment: b size mismatch");
    }
    if (!A.is_normalized()) {
        fail(ErrorCode::NotNormalized, "augment expects normalized rows");
    }
    if (!(zeta > 0.0) || !(phi > 0.0)) {
        fail(ErrorCode::InvalidArgument, "zeta and phi must be positive");
    }

    const CscView csc = make_csc(A);
    for (index_t t = 0; t < n; ++t) {
        if (csc.col_ptr[static_cast<std::size_t>(t)] ==
            csc.col_ptr[static_cast<std::size_t>(t) + 1]) {
            fail(ErrorCode::ZeroColumn,
                 "column " + std::to_string(t) +
                     " is empty: its augmented row would read 0 = 0; drop "
                     "the variable first");
        }
    }

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(2 * A.nnz() + m));
    // top block: phi * A^T against the y variables (columns n..n+m-1)
    for (index_t t = 0; t < n; ++t) {
        for (index_t k = csc.col_ptr[static_cast<std::size_t>(t)];
             k < csc.col_ptr[static_cast<std::size_t>(t) + 1]; ++k) {
            trip.push_back({t,
                            n + csc.row_idx[static_cast<std::size_t>(k)],
                            phi * csc.values[static_cast<std::size_t>(k)]});
        }
    }
    // bottom block: A against x, -zeta*I against y
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();
    for (index_t i = 0; i < m; ++i) {
        for (index_t k = rp[static_cast<std::size_t>(i)];
             k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
            trip.push_back({n + i, ci[static_cast<std::size_t>(k)],
                            vals[static_cast<std::size_t>(k)]});
        }
        trip.push_back({n + i, n + i, -zeta});
    }
    CsrMatrix raw = CsrMatrix::from_triplets(trip, n + m, n + m);

    std::vector<double> bt(static_cast<std::size_t>(n + m), 0.0);
    std::vector<double> atb;
    A.multiply_transpose(b, atb);
    for (index_t t = 0; t < n; ++t) {
        bt[static_cast<std::size_t>(t)] = phi * atb[static_cast<std::size_t>(t)];
    }

    AugmentedSystem aug;
    aug.zeta = zeta;
    aug.phi = phi;
    aug.row_scales = raw.row_norm();
    auto [scaled, scaled_b] = normalize_rows(raw, bt);
    aug.a_tilde = std::move(scaled);
    aug.b_tilde = std::move(scaled_b);
    return aug;
}

LsqResult lsq_solve(const CsrMatrix& A, std::span<const double> b,
                    const LsqConfig& cfg) {
    const index_t m = A.rows();
    const index_t n = A.cols();
    if (static_cast<index_t>(b.size()) != m) {
        fail(ErrorCode::DimensionMismatch, "lsq_solve: b size mismatch");
    }
    if (!A.is_normalized()) {
        fail(ErrorCode::NotNormalized, "lsq_solve expects normalized rows");
    }

    double sigma_r;
    if (cfg.sigma_r) {
        if (!(*cfg.sigma_r > 0.0)) {
            fail(ErrorCode::NonPositiveSigma, "supplied sigma_r must be > 0");
        }
        sigma_r = *cfg.sigma_r;
    } else {
        if (m * n > SolutionProjector::kDefaultDenseCap) {
            fail(ErrorCode::SigmaUnavailable,
                 "matrix too large for the dense spectrum; pass sigma_r");
        }
        sigma_r = dense_spectrum(A).sigma_r;
        if (!(sigma_r > 0.0)) {
            fail(ErrorCode::SigmaUnavailable,
                 "could not extract a positive smallest singular value");
        }
    }

    const auto [phi_opt, zeta_opt] = optimal_params(sigma_r);
    const double phi = cfg.phi > 0.0 ? cfg.phi : phi_opt;
    const double zeta = cfg.zeta > 0.0 ? cfg.zeta : zeta_opt;

    const AugmentedSystem aug = augment(A, b, zeta, phi);

    RkConfig rk;
    rk.max_epochs = cfg.max_epochs;
    rk.target_r_sq = cfg.target_r_sq;
    rk.seed = cfg.seed;
    rk.sampling = cfg.sampling;
    std::vector<double> x0(static_cast<std::size_t>(n + m), 0.0);
    Trace trace = rk_solve(aug.a_tilde, aug.b_tilde, x0, rk);

    LsqResult out;
    out.zeta = zeta;
    out.phi = phi;
    out.sigma_r = sigma_r;
    out.x_ls.resize(static_cast<std::size_t>(n));
    // the x block of the augmented solution is zeta * x_ls
    for (index_t t = 0; t < n; ++t) {
        out.x_ls[static_cast<std::size_t>(t)] =
            trace.final_x[static_cast<std::size_t>(t)] / zeta;
    }
    out.y.assign(trace.final_x.begin() + n, trace.final_x.end());

    std::vector<double> ax(static_cast<std::size_t>(m));
    A.multiply(out.x_ls, ax);
    for (index_t i = 0; i < m; ++i) {
        ax[static_cast<std::size_t>(i)] -= b[static_cast<std::size_t>(i)];
    }
    std::vector<double> grad;
    A.multiply_transpose(ax, grad);
    double g = 0.0;
    for (double v : grad) g += v * v;
    out.grad_norm = std::sqrt(g);
    out.trace = std::move(trace);
    return out;
}

} // namespace asyrk

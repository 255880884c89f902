#include "asyrk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "asyrk/dense.hpp"
#include "asyrk/error.hpp"
#include "asyrk/rng.hpp"

namespace asyrk {

double power_iteration_lambda_max(const CsrMatrix& A, double tol,
                                  index_t max_iters) {
    const index_t n = A.cols();
    // Fixed seed: stats must not depend on caller RNG state.
    auto gen = make_stream(0x5ca1ab1eULL, 0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = standard_normal(gen);

    auto nrm = [](const std::vector<double>& u) {
        double s = 0.0;
        for (double x : u) s += x * x;
        return std::sqrt(s);
    };
    double vn = nrm(v);
    if (vn == 0.0) v[0] = 1.0, vn = 1.0;
    for (auto& x : v) x /= vn;

    std::vector<double> av, w;
    double lambda = 0.0;
    for (index_t it = 0; it < max_iters; ++it) {
        A.multiply(v, av);
        A.multiply_transpose(av, w);
        const double wn = nrm(w);
        if (wn == 0.0) return 0.0;  // v in the null space of A
        double next = 0.0;  // Rayleigh quotient v^T (A^T A v), v unit
        for (std::size_t k = 0; k < v.size(); ++k) next += v[k] * w[k];
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = w[k] / wn;
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
            return next;
        }
        lambda = next;
    }
    fail(ErrorCode::PowerIterationDiverged,
         "power iteration did not converge within " +
             std::to_string(max_iters) + " iterations");
}

SystemStats compute_stats(const CsrMatrix& A, const StatsOptions& opts) {
    if (!A.is_normalized()) {
        fail(ErrorCode::NotNormalized,
             "stats are defined for row-normalized matrices; call "
             "normalize_rows first");
    }
    SystemStats s;
    s.m = A.rows();
    s.n = A.cols();
    s.delta = static_cast<double>(A.nnz()) /
              (static_cast<double>(s.m) * static_cast<double>(s.n));

    s.theta.resize(static_cast<std::size_t>(s.m));
    for (index_t i = 0; i < s.m; ++i) {
        s.theta[static_cast<std::size_t>(i)] = A.row_nnz(i);
        s.mu = std::max(s.mu, A.row_nnz(i));
    }

    const CscView csc = make_csc(A);
    std::vector<double> col_norm(static_cast<std::size_t>(s.n), 0.0);
    for (index_t t = 0; t < s.n; ++t) {
        const index_t cnt = csc.col_ptr[static_cast<std::size_t>(t) + 1] -
                            csc.col_ptr[static_cast<std::size_t>(t)];
        if (cnt == 0) {
            fail(ErrorCode::ZeroColumn,
                 "column " + std::to_string(t) + " has no nonzeros");
        }
        s.nu = std::max(s.nu, cnt);
        double c = 0.0;
        for (index_t k = csc.col_ptr[static_cast<std::size_t>(t)];
             k < csc.col_ptr[static_cast<std::size_t>(t) + 1]; ++k) {
            const double v = csc.values[static_cast<std::size_t>(k)];
            c += v * v;
        }
        col_norm[static_cast<std::size_t>(t)] = std::sqrt(c);
        s.frob_sq += c;
        s.l_max = std::max(s.l_max, c);
    }

    // alpha = max over rows i and components t in supp(a_i) of
    // theta_i * |(a_i)_t| * ||column t||: the spectral norm of the rank-one
    // matrix A theta_i P_t a_i is bounded by that product and attained by it.
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& vals = A.values();
    for (index_t i = 0; i < s.m; ++i) {
        const double th = static_cast<double>(A.row_nnz(i));
        for (index_t k = rp[static_cast<std::size_t>(i)];
             k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
            const double cand =
                th * std::abs(vals[static_cast<std::size_t>(k)]) *
                col_norm[static_cast<std::size_t>(ci[static_cast<std::size_t>(k)])];
            s.alpha = std::max(s.alpha, cand);
        }
    }

    // L_res = max_t ||A^T (A e_t)|| computed column by column: A e_t is the
    // t-th column (sparse), A^T of a sparse vector touches only rows in its
    // support.
    std::vector<double> acc(static_cast<std::size_t>(s.n), 0.0);
    for (index_t t = 0; t < s.n; ++t) {
        std::vector<index_t> touched;
        for (index_t k = csc.col_ptr[static_cast<std::size_t>(t)];
             k < csc.col_ptr[static_cast<std::size_t>(t) + 1]; ++k) {
            const index_t i = csc.row_idx[static_cast<std::size_t>(k)];
            const double av = csc.values[static_cast<std::size_t>(k)];
            for (index_t kk = rp[static_cast<std::size_t>(i)];
                 kk < rp[static_cast<std::size_t>(i) + 1]; ++kk) {
                const index_t u =
                    ci[static_cast<std::size_t>(kk)];
                if (acc[static_cast<std::size_t>(u)] == 0.0) touched.push_back(u);
                acc[static_cast<std::size_t>(u)] +=
                    av * vals[static_cast<std::size_t>(kk)];
            }
        }
        double rs = 0.0;
        for (index_t u : touched) {
            const double x = acc[static_cast<std::size_t>(u)];
            rs += x * x;
            acc[static_cast<std::size_t>(u)] = 0.0;
        }
        s.l_res = std::max(s.l_res, std::sqrt(rs));
    }

    if (opts.exact_spectral) {
        const Spectrum sp = dense_spectrum(A);
        s.lambda_max = sp.lambda_max;
        s.lambda_min = sp.lambda_min;
        s.sigma_r = sp.sigma_r;
    } else {
        s.lambda_max = power_iteration_lambda_max(A, opts.tol, opts.max_power_iters);
    }
    return s;
}

std::string SystemStats::to_json() const {
    nlohmann::json j;
    j["m"] = m;
    j["n"] = n;
    j["delta"] = delta;
    j["theta"] = theta;
    j["mu"] = mu;
    j["nu"] = nu;
    j["alpha"] = alpha;
    if (lambda_min) j["lambda_min"] = *lambda_min;
    j["lambda_max"] = lambda_max;
    j["frob_sq"] = frob_sq;
    j["l_max"] = l_max;
    j["l_res"] = l_res;
    if (sigma_r) j["sigma_r"] = *sigma_r;
    return j.dump(2);
}

SystemStats SystemStats::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::IoError, std::string("bad stats JSON: ") + e.what());
    }
    SystemStats s;
    try {
        s.m = j.at("m").get<index_t>();
        s.n = j.at("n").get<index_t>();
        s.delta = j.at("delta").get<double>();
        s.theta = j.at("theta").get<std::vector<index_t>>();
        s.mu = j.at("mu").get<index_t>();
        s.nu = j.at("nu").get<index_t>();
        s.alpha = j.at("alpha").get<double>();
        if (j.contains("lambda_min")) s.lambda_min = j["lambda_min"].get<double>();
        s.lambda_max = j.at("lambda_max").get<double>();
        s.frob_sq = j.at("frob_sq").get<double>();
        s.l_max = j.at("l_max").get<double>();
        s.l_res = j.at("l_res").get<double>();
        if (j.contains("sigma_r")) s.sigma_r = j["sigma_r"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::IoError, std::string("bad stats JSON: ") + e.what());
    }
    return s;
}

} // namespace asyrk

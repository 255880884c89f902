#include "asyrk/kaczmarz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include <json.hpp>

#include "asyrk/error.hpp"

namespace asyrk {

AliasTable::AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) fail(ErrorCode::InvalidArgument, "alias table needs weights");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            fail(ErrorCode::InvalidArgument, "alias weights must be >= 0");
        }
        sum += w;
    }
    if (sum <= 0.0) {
        fail(ErrorCode::InvalidArgument, "alias weights sum to zero");
    }
    prob_.resize(n);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t k = 0; k < n; ++k) {
        scaled[k] = weights[k] * static_cast<double>(n) / sum;
    }
    std::vector<index_t> small, large;
    for (std::size_t k = 0; k < n; ++k) {
        (scaled[k] < 1.0 ? small : large).push_back(static_cast<index_t>(k));
    }
    while (!small.empty() && !large.empty()) {
        const index_t s = small.back();
        small.pop_back();
        const index_t l = large.back();
        prob_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
        alias_[static_cast<std::size_t>(s)] = l;
        scaled[static_cast<std::size_t>(l)] -=
            1.0 - scaled[static_cast<std::size_t>(s)];
        if (scaled[static_cast<std::size_t>(l)] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (index_t k : large) prob_[static_cast<std::size_t>(k)] = 1.0;
    for (index_t k : small) prob_[static_cast<std::size_t>(k)] = 1.0;
}

index_t AliasTable::sample(std::mt19937_64& gen) const {
    const index_t k = static_cast<index_t>(
        uniform_below(gen, static_cast<std::uint64_t>(prob_.size())));
    const double u = uniform_unit(gen);
    return u < prob_[static_cast<std::size_t>(k)]
               ? k
               : alias_[static_cast<std::size_t>(k)];
}

std::vector<double> rk_step(const CsrMatrix& A, std::span<const double> b,
                            std::span<const double> x, index_t i) {
    if (static_cast<index_t>(b.size()) != A.rows() ||
        static_cast<index_t>(x.size()) != A.cols()) {
        fail(ErrorCode::DimensionMismatch, "rk_step: b or x size mismatch");
    }
    if (i < 0 || i >= A.rows()) {
        fail(ErrorCode::IndexOutOfRange,
             "rk_step: row " + std::to_string(i) + " out of range");
    }
    std::vector<double> out(x.begin(), x.end());
    const double res = detail::stale_residual(A, out, b, i);
    const double c = detail::row_coef(A, i, 1.0, res);
    detail::apply_row(A, i, c, out);
    return out;
}

double asyrk_update(const CsrMatrix& A, std::span<const double> b, index_t i,
                    index_t t, double gamma, std::span<const double> x_read) {
    if (static_cast<index_t>(b.size()) != A.rows() ||
        static_cast<index_t>(x_read.size()) != A.cols()) {
        fail(ErrorCode::DimensionMismatch, "asyrk_update: size mismatch");
    }
    if (i < 0 || i >= A.rows()) {
        fail(ErrorCode::IndexOutOfRange,
             "asyrk_update: row " + std::to_string(i) + " out of range");
    }
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto begin = ci.begin() + rp[static_cast<std::size_t>(i)];
    const auto end = ci.begin() + rp[static_cast<std::size_t>(i) + 1];
    const auto pos = std::lower_bound(begin, end, t);
    if (pos == end || *pos != t) {
        fail(ErrorCode::ComponentNotInSupport,
             "component " + std::to_string(t) + " not in supp of row " +
                 std::to_string(i));
    }
    const double a_it =
        A.values()[static_cast<std::size_t>(pos - ci.begin())];
    const double res = detail::stale_residual(A, x_read, b, i);
    return -gamma * static_cast<double>(A.row_nnz(i)) * a_it * res;
}

namespace {

const char* sampling_name(Sampling s) {
    switch (s) {
        case Sampling::uniform: return "uniform";
        case Sampling::norm_proportional: return "norm_proportional";
        case Sampling::shuffle: return "shuffle";
    }
    return "?";
}

double dist_sq_to(std::span<const double> x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

} // namespace

Trace rk_solve(const CsrMatrix& A, std::span<const double> b,
               std::span<const double> x0, const RkConfig& cfg) {
    const index_t m = A.rows();
    const index_t n = A.cols();
    if (static_cast<index_t>(b.size()) != m ||
        static_cast<index_t>(x0.size()) != n) {
        fail(ErrorCode::DimensionMismatch, "rk_solve: b or x0 size mismatch");
    }
    if (cfg.sampling == Sampling::uniform && !A.is_normalized()) {
        fail(ErrorCode::NotNormalized,
             "uniform row sampling is only unbiased on normalized rows; "
             "use norm_proportional or normalize first");
    }
    if (cfg.max_epochs < 0) {
        fail(ErrorCode::InvalidArgument, "max_epochs must be >= 0");
    }

    auto gen = make_stream(cfg.seed, 0);
    std::vector<double> x(x0.begin(), x0.end());

    std::unique_ptr<AliasTable> alias;
    std::vector<index_t> perm;
    if (cfg.sampling == Sampling::norm_proportional) {
        std::vector<double> w(static_cast<std::size_t>(m));
        for (index_t i = 0; i < m; ++i) {
            const double nrm = A.row_norm(i);
            w[static_cast<std::size_t>(i)] = nrm * nrm;
        }
        alias = std::make_unique<AliasTable>(w);
    } else if (cfg.sampling == Sampling::shuffle) {
        perm.resize(static_cast<std::size_t>(m));
        for (index_t i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
    }

    Trace trace;
    {
        nlohmann::json c;
        c["solver"] = "rk";
        c["m"] = m;
        c["n"] = n;
        c["max_epochs"] = cfg.max_epochs;
        c["target_r_sq"] = cfg.target_r_sq;
        c["seed"] = cfg.seed;
        c["sampling"] = sampling_name(cfg.sampling);
        c["dist_oracle"] =
            cfg.x_star ? "x_star" : (cfg.projector ? "projector" : "none");
        trace.config_echo = c.dump();
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&](index_t epoch, index_t updates) -> double {
        const Residuals res = residuals(A, x, b);
        if (!std::isfinite(res.r_sq) || !std::isfinite(res.grad_sq)) {
            fail(ErrorCode::NonFinite,
                 "iterate became non-finite at epoch " + std::to_string(epoch));
        }
        EpochRecord rec;
        rec.epoch_index = epoch;
        rec.r_sq = res.r_sq;
        rec.grad_sq = res.grad_sq;
        if (cfg.x_star) {
            rec.dist_sq = dist_sq_to(x, *cfg.x_star);
        } else if (cfg.projector) {
            rec.dist_sq = cfg.projector->dist_sq(x);
        }
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        rec.updates_applied = updates;
        trace.epochs.push_back(rec);
        return res.r_sq;
    };

    double r_sq = record(0, 0);
    for (index_t e = 1; e <= cfg.max_epochs && r_sq > cfg.target_r_sq; ++e) {
        if (cfg.sampling == Sampling::shuffle) shuffle_in_place(perm, gen);
        for (index_t q = 0; q < m; ++q) {
            index_t i;
            switch (cfg.sampling) {
                case Sampling::uniform:
                    i = static_cast<index_t>(
                        uniform_below(gen, static_cast<std::uint64_t>(m)));
                    break;
                case Sampling::norm_proportional:
                    i = alias->sample(gen);
                    break;
                case Sampling::shuffle:
                default:
                    i = perm[static_cast<std::size_t>(q)];
                    break;
            }
            const double res = detail::stale_residual(A, x, b, i);
            const double c = detail::row_coef(A, i, 1.0, res);
            detail::apply_row(A, i, c, x);
        }
        r_sq = record(e, e * m);
    }
    trace.final_x = std::move(x);
    return trace;
}

std::vector<double> project_solution_set(const CsrMatrix& A,
                                         std::span<const double> b,
                                         std::span<const double> x) {
    SolutionProjector proj(A, std::vector<double>(b.begin(), b.end()));
    return proj.project(x);
}

} // namespace asyrk

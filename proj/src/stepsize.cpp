#include "asyrk/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "asyrk/error.hpp"

namespace asyrk {

namespace {

void require_core_stats(const SystemStats& s) {
    if (s.m <= 0 || s.mu <= 0 || s.alpha <= 0.0 || s.lambda_max <= 0.0) {
        fail(ErrorCode::MissingStats,
             "need m, mu, alpha and lambda_max to evaluate step bounds");
    }
}

} // namespace

double psi(double mu, double lambda_max, index_t tau, double rho, index_t m) {
    if (m < 1) fail(ErrorCode::InvalidArgument, "m must be >= 1");
    if (tau < 0) fail(ErrorCode::InvalidArgument, "tau must be >= 0");
    if (tau == 0) return mu;
    if (!(rho > 1.0)) {
        fail(ErrorCode::InvalidRho, "rho must exceed 1 when tau > 0");
    }
    return mu + 2.0 * lambda_max * static_cast<double>(tau) *
                    std::pow(rho, static_cast<double>(tau)) /
                    static_cast<double>(m);
}

GammaBounds gamma_bounds(const SystemStats& stats, index_t tau, double rho) {
    require_core_stats(stats);
    if (!(rho > 1.0)) {
        fail(ErrorCode::InvalidRho, "rho must exceed 1");
    }
    const double m = static_cast<double>(stats.m);
    const double mu = static_cast<double>(stats.mu);
    const double lmax = stats.lambda_max;
    const double t = static_cast<double>(tau);
    const double rho_t = std::pow(rho, t);

    GammaBounds g;
    g.b1 = 1.0 / psi(mu, lmax, tau, rho, stats.m);
    g.b2 = m * (rho - 1.0) / (2.0 * lmax * rho_t * rho);
    g.b3 = m * std::sqrt((rho - 1.0) /
                         (rho_t * (m * stats.alpha * stats.alpha +
                                   lmax * lmax * t * rho_t)));
    g.gamma = std::min({g.b1, g.b2, g.b3});
    return g;
}

StepParams corollary_params(const SystemStats& stats, index_t tau) {
    require_core_stats(stats);
    if (tau < 0) fail(ErrorCode::InvalidArgument, "tau must be >= 0");
    const double m = static_cast<double>(stats.m);
    const double mu = static_cast<double>(stats.mu);
    const double lhs = 2.0 * std::numbers::e * stats.lambda_max *
                       static_cast<double>(tau + 1) / m;

    StepParams p;
    p.tau = tau;
    p.feasible = lhs <= 1.0;
    p.rho = 1.0 + lhs;
    p.psi = psi(mu, stats.lambda_max, tau, p.rho, stats.m);
    if (p.feasible) {
        p.gamma_bounds = gamma_bounds(stats, tau, p.rho);
        p.gamma = 1.0 / p.psi;
        if (stats.lambda_min) {
            const RateIteration r = rate_iteration(stats, p.gamma, p.psi);
            p.rate_iter = r.per_iteration;
            p.rate_simplified = 1.0 - *stats.lambda_min / (m * (mu + 1.0));
        }
    }
    return p;
}

RateIteration rate_iteration(const SystemStats& stats, double gamma,
                             double psi_value) {
    if (!(gamma > 0.0)) {
        fail(ErrorCode::InvalidGamma, "gamma must be positive");
    }
    if (!(gamma < 2.0 / psi_value)) {
        fail(ErrorCode::StepTooLarge,
             "gamma must stay below 2/psi for guaranteed progress");
    }
    if (!stats.lambda_min) {
        fail(ErrorCode::MissingStats, "lambda_min required for rate");
    }
    const double m = static_cast<double>(stats.m);
    RateIteration r;
    r.per_iteration =
        1.0 - *stats.lambda_min * gamma * (2.0 - gamma * psi_value) / m;
    r.per_epoch = std::pow(r.per_iteration, m);
    return r;
}

ProbBound iteration_bound(const SystemStats& stats, double x0_dist_sq,
                          double epsilon, double eta) {
    if (!stats.lambda_min || !(*stats.lambda_min > 0.0)) {
        fail(ErrorCode::ZeroLambdaMin,
             "the bound requires lambda_min > 0");
    }
    if (!(epsilon > 0.0) || !(x0_dist_sq > 0.0)) {
        fail(ErrorCode::InvalidArgument, "epsilon and x0_dist_sq must be > 0");
    }
    if (!(eta > 0.0 && eta < 1.0)) {
        fail(ErrorCode::InvalidArgument, "eta must lie in (0,1)");
    }
    const double m = static_cast<double>(stats.m);
    const double mu = static_cast<double>(stats.mu);
    const double j = m * (mu + 1.0) / *stats.lambda_min *
                     std::abs(std::log(x0_dist_sq / (eta * epsilon)));
    ProbBound b;
    b.epsilon = epsilon;
    b.eta = eta;
    b.j_min = static_cast<index_t>(std::ceil(j));
    return b;
}

RateReport rate_table(const SystemStats& stats, index_t tau) {
    if (stats.m <= 0 || stats.n <= 0 || stats.mu <= 0 ||
        stats.lambda_max <= 0.0 || stats.l_max <= 0.0 || stats.l_res <= 0.0) {
        fail(ErrorCode::MissingStats,
             "rate table needs m, n, mu, lambda_max, l_max and l_res");
    }
    const double m = static_cast<double>(stats.m);
    const double n = static_cast<double>(stats.n);
    const double mu = static_cast<double>(stats.mu);
    const double d = stats.delta;

    RateReport rep;
    rep.tau = tau;

    RateTableColumn rk;
    rk.method = "RK";
    rk.ops_per_iteration = d * n;
    rk.processors = 1.0;
    if (stats.lambda_min) {
        rk.rate_iteration = 1.0 - *stats.lambda_min / m;
        rk.rate_running_time = 1.0 - *stats.lambda_min / (d * m * n);
    }

    RateTableColumn scd;
    scd.method = "AsySCD";
    scd.ops_per_iteration = std::min(d * d * m * n, n);
    scd.processors = std::sqrt(n) * stats.l_max / stats.l_res;
    if (stats.lambda_min) {
        scd.rate_iteration = 1.0 - *stats.lambda_min / (2.0 * n * stats.l_max);
        scd.rate_running_time =
            1.0 - *stats.lambda_min /
                      (std::pow(n, 1.5) * stats.l_res * std::min(d * d * m, 1.0));
    }

    RateTableColumn ark;
    ark.method = "AsyRK";
    ark.ops_per_iteration = d * n;
    ark.processors = m / stats.lambda_max;
    ark.processors_feasible =
        m / (2.0 * std::numbers::e * stats.lambda_max) - 1.0;
    if (stats.lambda_min) {
        ark.rate_iteration = 1.0 - *stats.lambda_min / (m * (mu + 1.0));
        ark.rate_running_time =
            1.0 - *stats.lambda_min / (d * d * n * n * stats.lambda_max);
    }

    rep.columns = {rk, scd, ark};
    return rep;
}

std::string RateReport::to_json() const {
    nlohmann::json j;
    j["tau"] = tau;
    j["note"] = "big-O entries reported with constant 1 (estimate)";
    j["methods"] = nlohmann::json::array();
    for (const auto& c : columns) {
        nlohmann::json jc;
        jc["method"] = c.method;
        jc["ops_per_iteration_estimate"] = c.ops_per_iteration;
        jc["rate_iteration"] =
            c.rate_iteration ? nlohmann::json(*c.rate_iteration)
                             : nlohmann::json(nullptr);
        jc["processors_estimate"] = c.processors;
        if (c.processors_feasible) {
            jc["processors_feasible"] = *c.processors_feasible;
        }
        jc["rate_running_time_estimate"] =
            c.rate_running_time ? nlohmann::json(*c.rate_running_time)
                                : nlohmann::json(nullptr);
        j["methods"].push_back(jc);
    }
    return j.dump(2);
}

std::string RateReport::to_text() const {
    auto fmt = [](std::optional<double> v) {
        if (!v) return std::string("n/a");
        std::ostringstream s;
        s << std::setprecision(6) << *v;
        return s.str();
    };
    std::ostringstream out;
    out << std::left;
    out << std::setw(26) << "quantity (estimate)";
    for (const auto& c : columns) out << std::setw(16) << c.method;
    out << '\n';
    out << std::setw(26) << "ops / iteration";
    for (const auto& c : columns) {
        out << std::setw(16) << fmt(c.ops_per_iteration);
    }
    out << '\n';
    out << std::setw(26) << "rate (iteration)";
    for (const auto& c : columns) out << std::setw(16) << fmt(c.rate_iteration);
    out << '\n';
    out << std::setw(26) << "max processors";
    for (const auto& c : columns) {
        std::string cell = fmt(c.processors);
        if (c.processors_feasible) {
            cell += " | " + fmt(*c.processors_feasible);
        }
        out << std::setw(16) << cell;
    }
    out << '\n';
    out << std::setw(26) << "rate (running time)";
    for (const auto& c : columns) {
        out << std::setw(16) << fmt(c.rate_running_time);
    }
    out << '\n';
    return out.str();
}

} // namespace asyrk

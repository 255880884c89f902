#pragma once

#include <optional>
#include <string>

#include "asyrk/stats.hpp"

namespace asyrk {

struct GammaBounds {
    double b1 = 0.0;   // 1/psi
    double b2 = 0.0;   // m(rho-1) / (2 lambda_max rho^(tau+1))
    double b3 = 0.0;   // m sqrt((rho-1) / (rho^tau (m alpha^2 + lambda_max^2 tau rho^tau)))
    double gamma = 0.0; // min of the three
};

/// Step-size machinery of the bounded-staleness convergence theorem.
/// `feasible` reflects 2e*lambda_max*(tau+1)/m <= 1; when false the params
/// are informational only and gamma is not meant to be used.
struct StepParams {
    index_t tau = 0;
    double rho = 0.0;
    double psi = 0.0;
    double gamma = 0.0;
    GammaBounds gamma_bounds;
    bool feasible = false;
    std::optional<double> rate_iter;        // 1 - lambda_min*gamma*(2-gamma*psi)/m
    std::optional<double> rate_simplified;  // 1 - lambda_min/(m*(mu+1))
};

struct ProbBound {
    double epsilon = 0.0;
    double eta = 0.0;
    index_t j_min = 0;
};

/// psi = mu + 2*lambda_max*tau*rho^tau/m. For tau=0 the staleness term
/// vanishes and any rho is accepted.
double psi(double mu, double lambda_max, index_t tau, double rho, index_t m);

GammaBounds gamma_bounds(const SystemStats& stats, index_t tau, double rho);

/// rho = 1 + 2e*lambda_max*(tau+1)/m, gamma = 1/psi, with the feasibility
/// flag set by the same expression; infeasibility is data, not an error.
StepParams corollary_params(const SystemStats& stats, index_t tau);

struct RateIteration {
    double per_iteration = 0.0;  // 1 - lambda_min*gamma*(2-gamma*psi)/m
    double per_epoch = 0.0;      // per_iteration^m
};

RateIteration rate_iteration(const SystemStats& stats, double gamma,
                             double psi_value);

/// Smallest j with P(dist_sq <= epsilon) >= 1-eta per the high-probability
/// bound: j >= (m(mu+1)/lambda_min) * |ln(x0_dist_sq/(eta*epsilon))|.
ProbBound iteration_bound(const SystemStats& stats, double x0_dist_sq,
                          double epsilon, double eta);

/// Side-by-side complexity estimates for serial RK, asynchronous coordinate
/// descent on the normal equations, and this solver. Big-O entries are
/// reported with constant 1 and labeled as estimates.
struct RateTableColumn {
    std::string method;
    double ops_per_iteration = 0.0;
    std::optional<double> rate_iteration;
    double processors = 0.0;
    // Second processor-count form for the asynchronous row solver: the
    // feasibility threshold m/(2e*lambda_max) - 1 next to the m/lambda_max
    // big-O form.
    std::optional<double> processors_feasible;
    std::optional<double> rate_running_time;
};

struct RateReport {
    std::vector<RateTableColumn> columns;  // RK, AsySCD, AsyRK
    index_t tau = 0;

    std::string to_json() const;
    std::string to_text() const;  // aligned rows: ops, rate, processors, runtime rate
};

RateReport rate_table(const SystemStats& stats, index_t tau);

} // namespace asyrk

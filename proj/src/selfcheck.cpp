#include "asyrk/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "asyrk/datagen.hpp"
#include "asyrk/delay_sim.hpp"
#include "asyrk/dense.hpp"
#include "asyrk/error.hpp"
#include "asyrk/io.hpp"
#include "asyrk/kaczmarz.hpp"
#include "asyrk/parallel.hpp"
#include "asyrk/rng.hpp"
#include "asyrk/stats.hpp"
#include "asyrk/stepsize.hpp"

namespace asyrk {

namespace {

struct Checker {
    std::ostringstream msg;
    index_t failures = 0;
    index_t asserts = 0;

    void expect(bool ok, const std::string& what) {
        ++asserts;
        if (!ok && failures == 0) msg << what;
        if (!ok) ++failures;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

GenSpec random_spec(std::mt19937_64& g, std::uint64_t seed_salt) {
    GenSpec spec;
    spec.m = 5 + static_cast<index_t>(uniform_below(g, 56));
    spec.n = 3 + static_cast<index_t>(uniform_below(g, 38));
    const double dmin_row = static_cast<double>(spec.m + 1) /
                            static_cast<double>(spec.m * spec.n);
    // keep P(some column empty) under ~10% so the skip loop rarely triggers
    const double dmin_col =
        1.0 - std::pow(0.1 / static_cast<double>(spec.n),
                       1.0 / static_cast<double>(spec.m));
    const double dmin = std::max(dmin_row, dmin_col);
    spec.delta = dmin + (std::min(1.0, dmin + 0.6) - dmin) * uniform_unit(g);
    spec.seed = seed_salt ^ (0x9e3779b97f4a7c15ULL * (uniform_below(g, 1u << 30) + 1));
    return spec;
}

// A sparse draw can leave a column empty; that is legal generator output but
// invalid stats input, so skip such draws deterministically.
Instance gen_with_stats(GenSpec spec, SystemStats& st) {
    for (int tries = 64;; --tries) {
        Instance inst = gen_sparse_gaussian(spec);
        try {
            st = compute_stats(inst.A);
            return inst;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroColumn || tries <= 1) throw;
            spec.seed += 0x9e3779b9ULL;
        }
    }
}

CheckResult check_stats_bounds(std::uint64_t seed, index_t instances) {
    Checker c;
    auto g = make_stream(seed, 1);
    for (index_t k = 0; k < instances; ++k) {
        GenSpec spec = random_spec(g, seed + static_cast<std::uint64_t>(k));
        SystemStats st;
        Instance inst = gen_with_stats(spec, st);
        spec = inst.spec;  // the skip loop may have advanced the seed
        const double tol = 1e-9;
        std::string tag = " [m=" + std::to_string(spec.m) +
                          " n=" + std::to_string(spec.n) +
                          " seed=" + std::to_string(spec.seed) + "]";
        c.expect(st.m == spec.m && st.n == spec.n, "dims echo" + tag);
        c.expect(std::abs(st.frob_sq - static_cast<double>(st.m)) <=
                     tol * static_cast<double>(st.m),
                 "frob_sq != m: " + fmt(st.frob_sq) + tag);
        index_t mu = *std::max_element(st.theta.begin(), st.theta.end());
        c.expect(st.mu == mu && st.mu >= 1 && st.mu <= st.n, "mu" + tag);
        c.expect(st.nu >= 1 && st.nu <= st.m, "nu" + tag);
        double dexp = static_cast<double>(inst.A.nnz()) /
                      static_cast<double>(st.m * st.n);
        c.expect(std::abs(st.delta - dexp) <= 1e-12, "delta" + tag);
        double mu_d = static_cast<double>(st.mu);
        c.expect(st.alpha <= mu_d * std::sqrt(st.lambda_max) * (1 + tol),
                 "alpha > mu*sqrt(lambda_max)" + tag);
        c.expect(st.alpha <=
                     mu_d * std::sqrt(static_cast<double>(st.nu)) * (1 + tol),
                 "alpha > mu*sqrt(nu)" + tag);
        c.expect(st.lambda_max <=
                     mu_d * static_cast<double>(st.nu) * (1 + tol),
                 "lambda_max > mu*nu" + tag);
        c.expect(st.lambda_max * static_cast<double>(st.n) >=
                     static_cast<double>(st.m) * (1 - tol),
                 "lambda_max < m/n" + tag);
        c.expect(st.l_max <= st.l_res * (1 + tol) &&
                     st.l_res <= st.lambda_max * (1 + tol),
                 "l_max <= l_res <= lambda_max broken" + tag);
        c.expect(st.lambda_min.has_value() && *st.lambda_min >= -tol &&
                     *st.lambda_min <= st.lambda_max * (1 + tol),
                 "lambda_min range" + tag);
        // lambda_min is the smallest positive eigenvalue; the trace bound
        // m/n only caps it when A^T A has full rank n
        if (st.m >= st.n) {
            c.expect(*st.lambda_min * static_cast<double>(st.n) <=
                         static_cast<double>(st.m) * (1 + tol),
                     "lambda_min > m/n" + tag);
        }
        c.expect(st.sigma_r.has_value() && *st.sigma_r > 0.0 &&
                     *st.sigma_r * *st.sigma_r <= st.lambda_max * (1 + tol),
                 "sigma_r range" + tag);
        double r_sq = residuals(inst.A, *inst.x_star, inst.b).r_sq;
        c.expect(r_sq <= 1e-18 * static_cast<double>(st.m),
                 "b != A x_star: r_sq=" + fmt(r_sq) + tag);
    }
    std::string detail = c.failures == 0
                             ? std::to_string(instances) + " instances, " +
                                   std::to_string(c.asserts) + " assertions"
                             : c.msg.str() + " (" + std::to_string(c.failures) +
                                   "/" + std::to_string(c.asserts) + " failed)";
    return {"stats-structural-bounds", c.failures == 0, detail};
}

CheckResult check_step_bounds(std::uint64_t seed, index_t draws,
                              index_t instances) {
    Checker c;
    auto g = make_stream(seed, 2);
    const double e = std::numbers::e;
    index_t feasible_seen = 0;
    auto audit = [&](const SystemStats& st, index_t tau) {
        StepParams p = corollary_params(st, tau);
        double lhs = 2.0 * e * st.lambda_max * static_cast<double>(tau + 1) /
                     static_cast<double>(st.m);
        c.expect(p.feasible == (lhs <= 1.0), "feasibility flag");
        c.expect(p.rho == 1.0 + lhs, "rho formula");
        c.expect(p.psi >= static_cast<double>(st.mu) * (1 - 1e-12),
                 "psi < mu");
        if (!p.feasible) {
            c.expect(p.gamma == 0.0 && !p.rate_iter, "infeasible params not null");
            return;
        }
        ++feasible_seen;
        const GammaBounds& gb = p.gamma_bounds;
        c.expect(std::abs(gb.b1 * p.psi - 1.0) <= 1e-12, "b1 != 1/psi");
        c.expect(gb.b1 <= gb.b2 * (1 + 1e-9),
                 "b1 > b2: " + fmt(gb.b1) + " vs " + fmt(gb.b2));
        c.expect(gb.b1 <= gb.b3 * (1 + 1e-9),
                 "b1 > b3: " + fmt(gb.b1) + " vs " + fmt(gb.b3));
        c.expect(p.gamma == gb.b1, "gamma != b1");
        if (st.lambda_min && *st.lambda_min > 0.0) {
            c.expect(p.rate_iter && *p.rate_iter > 0.0 && *p.rate_iter < 1.0,
                     "rate_iter out of (0,1)");
            c.expect(p.rate_simplified && *p.rate_simplified > 0.0 &&
                         *p.rate_simplified < 1.0,
                     "rate_simplified out of (0,1)");
            ProbBound loose = iteration_bound(st, 1.0, 1e-4, 0.1);
            ProbBound tight = iteration_bound(st, 1.0, 1e-8, 0.1);
            c.expect(loose.j_min >= 1 && tight.j_min >= loose.j_min,
                     "iteration bound not monotone in epsilon");
        }
    };
    for (index_t d = 0; d < draws; ++d) {
        SystemStats st;
        st.m = 2 + static_cast<index_t>(uniform_below(g, 100000));
        st.n = st.m;
        st.mu = 1 + static_cast<index_t>(uniform_below(g, 50));
        st.theta.assign(1, st.mu);
        st.nu = st.mu;
        index_t tau = static_cast<index_t>(uniform_below(g, 21));
        double cap = static_cast<double>(st.m) /
                     (2.0 * e * static_cast<double>(tau + 1));
        st.lambda_max = std::max(1e-6, cap * uniform_unit(g));
        st.alpha = std::sqrt(st.lambda_max) * static_cast<double>(st.mu) *
                   std::max(1e-9, uniform_unit(g));
        st.lambda_min = st.lambda_max * uniform_unit(g);
        audit(st, tau);
        // push the boundary too: lambda_max at the cap exactly
        st.lambda_max = cap;
        st.alpha = std::sqrt(st.lambda_max) * static_cast<double>(st.mu);
        st.lambda_min = st.lambda_max;
        audit(st, tau);
    }
    for (index_t k = 0; k < instances; ++k) {
        GenSpec spec = random_spec(g, seed ^ (0xabcdefULL + static_cast<std::uint64_t>(k)));
        SystemStats st;
        Instance inst = gen_with_stats(spec, st);
        for (index_t tau = 0; tau <= 8; ++tau) audit(st, tau);
    }
    std::string detail =
        c.failures == 0
            ? std::to_string(c.asserts) + " assertions, " +
                  std::to_string(feasible_seen) + " feasible draws"
            : c.msg.str() + " (" + std::to_string(c.failures) + " failed)";
    return {"step-bound-ordering", c.failures == 0, detail};
}

CheckResult check_projection(std::uint64_t seed, index_t rounds) {
    Checker c;
    auto g = make_stream(seed, 3);
    for (index_t k = 0; k < rounds; ++k) {
        GenSpec spec = random_spec(g, seed + 77 * static_cast<std::uint64_t>(k + 1));
        Instance inst = gen_sparse_gaussian(spec);
        std::vector<double> x(static_cast<std::size_t>(spec.n));
        for (double& v : x) v = standard_normal(g);
        double dist0 = 0.0;
        for (index_t t = 0; t < spec.n; ++t) {
            double d = x[static_cast<std::size_t>(t)] -
                       (*inst.x_star)[static_cast<std::size_t>(t)];
            dist0 += d * d;
        }
        for (index_t rep = 0; rep < 20; ++rep) {
            index_t i = static_cast<index_t>(
                uniform_below(g, static_cast<std::uint64_t>(spec.m)));
            std::vector<double> y = rk_step(inst.A, inst.b, x, i);
            double res = inst.A.row_dot(i, y) -
                         inst.b[static_cast<std::size_t>(i)];
            c.expect(std::abs(res) <= 1e-9, "row residual after projection: " + fmt(res));
            std::vector<double> y2 = rk_step(inst.A, inst.b, y, i);
            double drift = 0.0;
            for (std::size_t t = 0; t < y.size(); ++t)
                drift = std::max(drift, std::abs(y2[t] - y[t]));
            c.expect(drift <= 1e-12, "projection not idempotent: " + fmt(drift));
            double dist1 = 0.0;
            for (index_t t = 0; t < spec.n; ++t) {
                double d = y[static_cast<std::size_t>(t)] -
                           (*inst.x_star)[static_cast<std::size_t>(t)];
                dist1 += d * d;
            }
            c.expect(dist1 <= dist0 * (1 + 1e-12) + 1e-15,
                     "distance to solution increased");
            x = std::move(y);
            dist0 = dist1;
        }
    }
    std::string detail = c.failures == 0
                             ? std::to_string(c.asserts) + " assertions"
                             : c.msg.str();
    return {"serial-projection-contract", c.failures == 0, detail};
}

CheckResult check_delay_log(std::uint64_t seed) {
    Checker c;
    GenSpec spec{.m = 8, .n = 5, .delta = 0.5, .seed = seed ^ 0xd31a7, .consistent = true};
    SystemStats st;
    Instance inst = gen_with_stats(spec, st);
    const index_t tau = 3;
    StepParams p = corollary_params(st, tau);
    if (!p.feasible) {
        p.gamma = 0.5 / p.psi;  // exercise the log even when infeasible
    }
    std::vector<double> x0(static_cast<std::size_t>(spec.n), 0.0);
    SimOptions opts;
    opts.max_events = 1000;
    const index_t iters = 100;
    for (auto kind : {DelayModel::Kind::fixed, DelayModel::Kind::uniform_random,
                      DelayModel::Kind::max_staleness}) {
        for (auto variant : {SimVariant::single_component, SimVariant::full_row}) {
            DelayModel dm{kind, tau};
            SimRun run = simulate(inst.A, inst.b, x0, p, dm, iters, seed, variant, opts);
            c.expect(static_cast<index_t>(run.events.size()) == iters, "event count");
            c.expect(static_cast<index_t>(run.history.size()) == tau + 1,
                     "history length");
            for (const UpdateEvent& ev : run.events) {
                c.expect(ev.i >= 0 && ev.i < spec.m, "row out of range");
                index_t lo = std::max<index_t>(0, ev.j - tau);
                c.expect(ev.k >= lo && ev.k <= ev.j, "delay bound violated");
                if (kind != DelayModel::Kind::uniform_random)
                    c.expect(ev.k == lo, "deterministic delay not maximal");
                if (variant == SimVariant::full_row) {
                    c.expect(ev.t == kAllComponents, "full_row component tag");
                } else {
                    const auto& rp = inst.A.row_ptr();
                    const auto& ci = inst.A.col_idx();
                    bool in_support = false;
                    for (index_t q = rp[static_cast<std::size_t>(ev.i)];
                         q < rp[static_cast<std::size_t>(ev.i) + 1]; ++q)
                        in_support |= ci[static_cast<std::size_t>(q)] == ev.t;
                    c.expect(in_support, "component outside row support");
                }
            }
        }
    }
    // gamma = 0 freezes the iterate
    StepParams frozen = p;
    frozen.gamma = 0.0;
    SimRun run = simulate(inst.A, inst.b, x0, frozen, DelayModel::fixed(tau),
                          iters, seed, SimVariant::single_component, opts);
    c.expect(run.trace.final_x == x0, "gamma=0 moved the iterate");
    std::string detail = c.failures == 0
                             ? std::to_string(c.asserts) + " assertions"
                             : c.msg.str();
    return {"delay-log-contract", c.failures == 0, detail};
}

CheckResult check_atomic_updates(std::uint64_t seed) {
    Checker c;
    GenSpec spec{.m = 48, .n = 16, .delta = 0.4, .seed = seed ^ 0xa70511c, .consistent = true};
    Instance inst = gen_sparse_gaussian(spec);
    std::vector<double> x0(static_cast<std::size_t>(spec.n), 0.0);
    for (index_t threads : {2, 4}) {
        for (auto variant : {UpdateVariant::full_row, UpdateVariant::single_component}) {
            RunConfig cfg;
            cfg.threads = threads;
            cfg.gamma = variant == UpdateVariant::full_row ? 0.9 : 0.05;
            cfg.epochs = 30;
            cfg.seed = seed;
            cfg.variant = variant;
            InstrumentReport rep;
            Trace tr = solve_parallel(inst.A, inst.b, x0, cfg, &rep);
            c.expect(rep.consistent,
                     "shared vector drifted from summed increments: err=" +
                         fmt(rep.max_abs_error) + " tol=" + fmt(rep.tolerance));
            c.expect(rep.row_updates >= spec.m, "too few row events");
            c.expect(rep.increments >= rep.row_updates, "increment accounting");
            c.expect(!tr.epochs.empty() && tr.epochs.back().r_sq >= 0.0, "trace shape");
        }
    }
    std::string detail = c.failures == 0
                             ? std::to_string(c.asserts) + " assertions"
                             : c.msg.str();
    return {"atomic-update-audit", c.failures == 0, detail};
}

CheckResult check_spectral_scaling(std::uint64_t seed, index_t rounds) {
    Checker c;
    auto g = make_stream(seed, 4);
    for (index_t k = 0; k < rounds; ++k) {
        index_t n = 60 + static_cast<index_t>(uniform_below(g, 61));
        GenSpec spec{.m = n, .n = n, .delta = 1.0,
                     .seed = seed + 31 * static_cast<std::uint64_t>(k + 1),
                     .consistent = true};
        Instance inst = gen_sparse_gaussian(spec);
        SystemStats st = compute_stats(inst.A);
        double mref = static_cast<double>(n);
        double expected = (std::sqrt(mref) + std::sqrt(mref)) *
                          (std::sqrt(mref) + std::sqrt(mref)) / mref;  // ~4
        c.expect(st.lambda_max >= expected / 1.5 && st.lambda_max <= expected * 1.5,
                 "dense Gaussian lambda_max " + fmt(st.lambda_max) +
                     " outside [" + fmt(expected / 1.5) + "," +
                     fmt(expected * 1.5) + "]");
    }
    std::string detail = c.failures == 0
                             ? std::to_string(c.asserts) + " assertions"
                             : c.msg.str();
    return {"gaussian-spectral-scaling", c.failures == 0, detail};
}

CheckResult check_determinism(std::uint64_t seed) {
    Checker c;
    auto g1 = make_stream(seed, 0);
    auto g2 = make_stream(seed, 0);
    auto g3 = make_stream(seed, 1);
    bool same = true, distinct = false;
    for (int k = 0; k < 16; ++k) {
        std::uint64_t a = g1(), b = g2(), d = g3();
        same &= a == b;
        distinct |= a != d;
    }
    c.expect(same, "same stream diverged");
    c.expect(distinct, "stream 1 mirrors stream 0");
    GenSpec spec{.m = 25, .n = 12, .delta = 0.3, .seed = seed, .consistent = true};
    Instance i1 = gen_sparse_gaussian(spec);
    Instance i2 = gen_sparse_gaussian(spec);
    c.expect(i1.A.col_idx() == i2.A.col_idx() && i1.A.values() == i2.A.values() &&
                 i1.b == i2.b && i1.x_star == i2.x_star,
             "generator not reproducible");
    RkConfig rc;
    rc.max_epochs = 5;
    rc.seed = seed;
    std::vector<double> x0(static_cast<std::size_t>(spec.n), 0.0);
    Trace t1 = rk_solve(i1.A, i1.b, x0, rc);
    Trace t2 = rk_solve(i2.A, i2.b, x0, rc);
    c.expect(t1.final_x == t2.final_x, "serial solver not reproducible");
    std::vector<index_t> perm(40);
    for (index_t i = 0; i < 40; ++i) perm[static_cast<std::size_t>(i)] = i;
    auto gs = make_stream(seed, 5);
    shuffle_in_place(perm, gs);
    std::vector<index_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    bool is_perm = true;
    for (index_t i = 0; i < 40; ++i)
        is_perm &= sorted[static_cast<std::size_t>(i)] == i;
    c.expect(is_perm, "shuffle is not a permutation");
    std::string detail = c.failures == 0
                             ? std::to_string(c.asserts) + " assertions"
                             : c.msg.str();
    return {"stream-determinism", c.failures == 0, detail};
}

CheckResult check_roundtrip(std::uint64_t seed) {
    Checker c;
    GenSpec spec{.m = 14, .n = 9, .delta = 0.35, .seed = seed ^ 0x10, .consistent = true};
    Instance inst = gen_sparse_gaussian(spec);
    auto dir = std::filesystem::temp_directory_path() /
               ("asyrk_selfcheck_" + std::to_string(seed));
    write_instance(dir.string(), inst);
    Instance back = read_instance(dir.string());
    std::filesystem::remove_all(dir);
    c.expect(back.A.rows() == inst.A.rows() && back.A.cols() == inst.A.cols(),
             "dims changed in round trip");
    c.expect(back.A.col_idx() == inst.A.col_idx() &&
                 back.A.values() == inst.A.values(),
             "matrix not bitwise identical after round trip");
    c.expect(back.b == inst.b, "b not bitwise identical");
    c.expect(back.x_star == inst.x_star, "x_star not bitwise identical");
    c.expect(back.A.is_normalized(), "normalized flag lost");
    c.expect(back.spec.seed == spec.seed && back.spec.delta == spec.delta,
             "spec echo changed");
    std::string detail = c.failures == 0
                             ? std::to_string(c.asserts) + " assertions"
                             : c.msg.str();
    return {"instance-roundtrip", c.failures == 0, detail};
}

} // namespace

bool SelfCheckReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& r) { return r.passed; });
}

std::string SelfCheckReport::to_text() const {
    std::ostringstream out;
    for (const CheckResult& r : checks)
        out << (r.passed ? "PASS" : "FAIL") << "  " << r.name << ": "
            << r.detail << "\n";
    out << (all_passed() ? "all checks passed" : "SELF-CHECK FAILED") << "\n";
    return out.str();
}

std::string SelfCheckReport::to_json() const {
    nlohmann::json j;
    j["all_passed"] = all_passed();
    j["checks"] = nlohmann::json::array();
    for (const CheckResult& r : checks)
        j["checks"].push_back(
            {{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    return j.dump(2);
}

SelfCheckReport run_selfcheck(std::uint64_t seed, bool quick) {
    SelfCheckReport report;
    auto guard = [&](const std::function<CheckResult()>& fn, const char* name) {
        try {
            report.checks.push_back(fn());
        } catch (const std::exception& e) {
            report.checks.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };
    guard([&] { return check_stats_bounds(seed, quick ? 20 : 100); },
          "stats-structural-bounds");
    guard([&] { return check_step_bounds(seed, quick ? 200 : 1000, quick ? 5 : 20); },
          "step-bound-ordering");
    guard([&] { return check_projection(seed, quick ? 3 : 10); },
          "serial-projection-contract");
    guard([&] { return check_delay_log(seed); }, "delay-log-contract");
    guard([&] { return check_atomic_updates(seed); }, "atomic-update-audit");
    guard([&] { return check_spectral_scaling(seed, quick ? 6 : 20); },
          "gaussian-spectral-scaling");
    guard([&] { return check_determinism(seed); }, "stream-determinism");
    guard([&] { return check_roundtrip(seed); }, "instance-roundtrip");
    return report;
}

} // namespace asyrk

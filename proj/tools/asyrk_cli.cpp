// Command-line driver binding the solver library: instance generation,
// statistics, the serial and shared-memory solvers, the delay simulator, the
// least-squares extension, thread sweeps, rate reports, and the self-check
// suite. Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage
// error (JSON on stderr).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asyrk/datagen.hpp"
#include "asyrk/delay_sim.hpp"
#include "asyrk/dense.hpp"
#include "asyrk/error.hpp"
#include "asyrk/io.hpp"
#include "asyrk/kaczmarz.hpp"
#include "asyrk/lsq.hpp"
#include "asyrk/parallel.hpp"
#include "asyrk/selfcheck.hpp"
#include "asyrk/stats.hpp"
#include "asyrk/stepsize.hpp"
#include "asyrk/trace.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_number(const std::string& text, const char* flag) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError(std::string(flag) + ": not a number: " + text);
    }
    if (used != text.size())
        throw UsageError(std::string(flag) + ": trailing characters in " + text);
    return v;
}

asyrk::index_t default_threads() {
    if (const char* env = std::getenv("ASYRK_THREADS")) {
        try {
            long v = std::stol(env);
            if (v >= 1) return static_cast<asyrk::index_t>(v);
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("ASYRK_THREADS is not a positive integer: ") + env);
    }
    return 1;
}

// Dense spectral work is only automatic when m*n is small enough; larger systems get
// power iteration (lambda_min then unavailable).
asyrk::SystemStats stats_for(const asyrk::CsrMatrix& A, int spectral_mode,
                             double tol) {
    asyrk::StatsOptions opts;
    opts.tol = tol;
    switch (spectral_mode) {
        case 1: opts.exact_spectral = true; break;
        case 2: opts.exact_spectral = false; break;
        default:
            opts.exact_spectral =
                A.rows() * A.cols() <= asyrk::SolutionProjector::kDefaultDenseCap;
    }
    return asyrk::compute_stats(A, opts);
}

struct TraceOut {
    std::string trace_path;  // JSON-lines
    std::string csv_path;
    std::string x_path;

    // with_x=false for commands whose natural output is not the raw iterate
    void add_flags(CLI::App* cmd, bool with_x = true) {
        cmd->add_option("--trace", trace_path, "write the run trace as JSON lines");
        cmd->add_option("--csv", csv_path, "write the run trace as CSV");
        if (with_x)
            cmd->add_option("--x-out", x_path,
                            "write the final iterate, one value per line");
    }

    void write(const asyrk::Trace& tr) const {
        if (!trace_path.empty()) asyrk::write_text(trace_path, tr.to_jsonl());
        if (!csv_path.empty()) asyrk::write_text(csv_path, tr.to_csv());
        if (!x_path.empty()) asyrk::write_vector(x_path, tr.final_x);
    }
};

json trace_summary(const asyrk::Trace& tr) {
    const asyrk::EpochRecord& last = tr.epochs.back();
    json j;
    j["epochs_recorded"] = tr.epochs.size();
    j["final_epoch"] = last.epoch_index;
    j["final_r_sq"] = last.r_sq;
    j["final_grad_sq"] = last.grad_sq;
    if (last.dist_sq) j["final_dist_sq"] = *last.dist_sq;
    j["updates_applied"] = last.updates_applied;
    j["wall_seconds"] = last.wall_seconds;
    return j;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

asyrk::Sampling parse_rk_sampling(const std::string& s) {
    if (s == "uniform") return asyrk::Sampling::uniform;
    if (s == "norm" || s == "norm-proportional")
        return asyrk::Sampling::norm_proportional;
    if (s == "shuffle") return asyrk::Sampling::shuffle;
    throw UsageError("--sampling: expected uniform|norm|shuffle, got " + s);
}

// ---------------------------------------------------------------- gen

struct GenArgs {
    asyrk::GenSpec spec;
    bool inconsistent = false;
    std::string out;
};

void cmd_gen(const GenArgs& a) {
    asyrk::GenSpec spec = a.spec;
    spec.consistent = !a.inconsistent;
    asyrk::Instance inst = asyrk::gen_sparse_gaussian(spec);
    asyrk::write_instance(a.out, inst);
    json j;
    j["out"] = a.out;
    j["m"] = spec.m;
    j["n"] = spec.n;
    j["nnz"] = inst.A.nnz();
    j["delta"] = static_cast<double>(inst.A.nnz()) /
                 (static_cast<double>(spec.m) * static_cast<double>(spec.n));
    j["consistent"] = spec.consistent;
    j["seed"] = spec.seed;
    emit(j);
}

// ---------------------------------------------------------------- stats

void cmd_stats(const std::string& dir, int spectral_mode, double tol,
               const std::string& out) {
    asyrk::Instance inst = asyrk::read_instance(dir);
    asyrk::SystemStats st = stats_for(inst.A, spectral_mode, tol);
    if (out.empty())
        std::cout << st.to_json() << "\n";
    else
        asyrk::write_text(out, st.to_json() + "\n");
}

// ---------------------------------------------------------------- solve-rk

struct SolveRkArgs {
    std::string dir;
    asyrk::RkConfig cfg;
    std::string sampling = "uniform";
    bool no_dist = false;
    TraceOut out;
};

void cmd_solve_rk(const SolveRkArgs& a) {
    asyrk::Instance inst = asyrk::read_instance(a.dir);
    asyrk::RkConfig cfg = a.cfg;
    cfg.sampling = parse_rk_sampling(a.sampling);
    if (!a.no_dist && inst.x_star) cfg.x_star = &*inst.x_star;
    std::vector<double> x0(static_cast<std::size_t>(inst.A.cols()), 0.0);
    asyrk::Trace tr = asyrk::rk_solve(inst.A, inst.b, x0, cfg);
    a.out.write(tr);
    emit(trace_summary(tr));
}

// ---------------------------------------------------------------- step params

// gamma_text is either a number or "corollary"; resolves the StepParams used
// by solve-asyrk and simulate, computing stats on demand.
asyrk::StepParams resolve_params(const asyrk::CsrMatrix& A,
                                 const std::string& gamma_text,
                                 asyrk::index_t tau, int spectral_mode,
                                 double tol, asyrk::SystemStats* stats_out) {
    asyrk::SystemStats st = stats_for(A, spectral_mode, tol);
    asyrk::StepParams p = asyrk::corollary_params(st, tau);
    if (gamma_text == "corollary") {
        if (!p.feasible) {
            double max_tau = static_cast<double>(st.m) /
                                 (2.0 * std::numbers::e * st.lambda_max) -
                             1.0;
            asyrk::fail(asyrk::ErrorCode::InvalidArgument,
                        "step-size rule infeasible at tau=" + std::to_string(tau) +
                            ": 2e*lambda_max*(tau+1)/m > 1; largest feasible tau is " +
                            std::to_string(max_tau));
        }
    } else {
        p.gamma = parse_number(gamma_text, "--gamma");
    }
    if (stats_out) *stats_out = st;
    return p;
}

// ---------------------------------------------------------------- solve-asyrk

struct SolveAsyrkArgs {
    std::string dir;
    asyrk::index_t threads = 0;  // 0: ASYRK_THREADS or 1
    std::string gamma = "corollary";
    asyrk::index_t tau = -1;  // -1: threads - 1
    asyrk::index_t epochs = 100;
    double target = 0.0;
    std::uint64_t seed = 0;
    std::string variant = "full-row";
    std::string sampling = "slice";
    asyrk::index_t snapshot_interval = 1;
    int spectral_mode = 0;
    double tol = 1e-9;
    bool instrument = false;
    bool no_dist = false;
    TraceOut out;
};

void cmd_solve_asyrk(const SolveAsyrkArgs& a) {
    asyrk::Instance inst = asyrk::read_instance(a.dir);
    asyrk::RunConfig cfg;
    cfg.threads = a.threads > 0 ? a.threads : default_threads();
    cfg.epochs = a.epochs;
    cfg.target_r_sq = a.target;
    cfg.seed = a.seed;
    cfg.snapshot_interval = a.snapshot_interval;
    if (a.variant == "full-row")
        cfg.variant = asyrk::UpdateVariant::full_row;
    else if (a.variant == "single")
        cfg.variant = asyrk::UpdateVariant::single_component;
    else
        throw UsageError("--variant: expected full-row|single, got " + a.variant);
    if (a.sampling == "slice")
        cfg.sampling = asyrk::ParSampling::slice_shuffle;
    else if (a.sampling == "replacement")
        cfg.sampling = asyrk::ParSampling::with_replacement;
    else
        throw UsageError("--sampling: expected slice|replacement, got " + a.sampling);

    asyrk::index_t tau = a.tau >= 0 ? a.tau : cfg.threads - 1;
    json j;
    if (a.gamma == "corollary") {
        asyrk::SystemStats st;
        asyrk::StepParams p =
            resolve_params(inst.A, a.gamma, tau, a.spectral_mode, a.tol, &st);
        cfg.gamma = p.gamma;
        j["tau"] = tau;
        j["rho"] = p.rho;
        j["psi"] = p.psi;
        if (p.rate_iter) j["rate_iteration_bound"] = *p.rate_iter;
    } else {
        cfg.gamma = parse_number(a.gamma, "--gamma");
    }
    j["gamma"] = cfg.gamma;
    j["threads"] = cfg.threads;

    if (!a.no_dist && inst.x_star) cfg.x_star = &*inst.x_star;
    std::vector<double> x0(static_cast<std::size_t>(inst.A.cols()), 0.0);
    asyrk::InstrumentReport rep;
    asyrk::Trace tr = asyrk::solve_parallel(inst.A, inst.b, x0, cfg,
                                            a.instrument ? &rep : nullptr);
    a.out.write(tr);
    j.update(trace_summary(tr));
    if (a.instrument) {
        j["instrument"] = {{"row_updates", rep.row_updates},
                           {"increments", rep.increments},
                           {"max_abs_error", rep.max_abs_error},
                           {"tolerance", rep.tolerance},
                           {"consistent", rep.consistent}};
    }
    emit(j);
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string dir;
    asyrk::index_t iterations = 0;
    asyrk::index_t tau = 0;
    std::string delay = "uniform";
    std::string gamma = "corollary";
    std::string variant = "single";
    std::uint64_t seed = 0;
    asyrk::index_t runs = 1;
    asyrk::index_t probe_every = 0;
    asyrk::index_t max_events = 0;
    int spectral_mode = 0;
    double tol = 1e-9;
    std::string probe_csv;
    std::string ratios_csv;
    TraceOut out;
};

void cmd_simulate(const SimulateArgs& a) {
    asyrk::Instance inst = asyrk::read_instance(a.dir);
    asyrk::StepParams p =
        resolve_params(inst.A, a.gamma, a.tau, a.spectral_mode, a.tol, nullptr);

    asyrk::DelayModel dm;
    if (a.delay == "fixed")
        dm = asyrk::DelayModel::fixed(a.tau);
    else if (a.delay == "uniform")
        dm = asyrk::DelayModel::uniform_random(a.tau);
    else if (a.delay == "max")
        dm = asyrk::DelayModel::max_staleness(a.tau);
    else
        throw UsageError("--delay: expected fixed|uniform|max, got " + a.delay);

    asyrk::SimVariant variant;
    if (a.variant == "single")
        variant = asyrk::SimVariant::single_component;
    else if (a.variant == "full-row")
        variant = asyrk::SimVariant::full_row;
    else
        throw UsageError("--variant: expected single|full-row, got " + a.variant);

    std::vector<double> x0(static_cast<std::size_t>(inst.A.cols()), 0.0);

    json j;
    j["gamma"] = p.gamma;
    j["rho"] = p.rho;
    j["psi"] = p.psi;
    j["tau"] = a.tau;
    j["feasible"] = p.feasible;

    if (a.runs > 1) {
        asyrk::MonteCarloRatios mc = asyrk::monte_carlo_ratios(
            inst.A, inst.b, x0, p, dm, a.iterations, a.runs, a.seed, variant);
        double lo = mc.ratios.empty() ? 1.0 : mc.ratios.front();
        double hi = lo;
        for (double r : mc.ratios) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        j["runs"] = a.runs;
        j["iterations"] = a.iterations;
        j["ratio_min"] = lo;
        j["ratio_max"] = hi;
        j["ratio_bound"] = {{"lower", 1.0 / p.rho}, {"upper", p.rho}};
        if (!a.ratios_csv.empty()) {
            std::string text = "iteration,mean_r_sq,ratio\n";
            char buf[96];
            for (std::size_t k = 0; k < mc.mean_r_sq.size(); ++k) {
                std::snprintf(buf, sizeof(buf), "%zu,%.17g,", k, mc.mean_r_sq[k]);
                text += buf;
                if (k < mc.ratios.size()) {
                    std::snprintf(buf, sizeof(buf), "%.17g", mc.ratios[k]);
                    text += buf;
                }
                text += "\n";
            }
            asyrk::write_text(a.ratios_csv, text);
        }
        emit(j);
        return;
    }

    asyrk::SimOptions opts;
    opts.max_events = a.max_events;
    std::optional<asyrk::SolutionProjector> proj;
    if (a.probe_every > 0) {
        opts.probe_every = a.probe_every;
        opts.probe_r_sq = true;
        if (inst.A.rows() * inst.A.cols() <=
            asyrk::SolutionProjector::kDefaultDenseCap) {
            proj.emplace(inst.A, inst.b);
            opts.projector = &*proj;
            opts.probe_dist_sq = true;
        }
    }
    asyrk::SimRun run = asyrk::simulate(inst.A, inst.b, x0, p, dm,
                                        a.iterations, a.seed, variant, opts);
    a.out.write(run.trace);
    if (!a.probe_csv.empty()) {
        std::string text = "iteration,r_sq,dist_sq\n";
        char buf[96];
        for (std::size_t k = 0; k < run.probe_iteration.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%lld,%.17g,",
                          static_cast<long long>(run.probe_iteration[k]),
                          run.probe_r_sq[k]);
            text += buf;
            if (k < run.probe_dist_sq.size()) {
                std::snprintf(buf, sizeof(buf), "%.17g", run.probe_dist_sq[k]);
                text += buf;
            }
            text += "\n";
        }
        asyrk::write_text(a.probe_csv, text);
    }
    j["iterations"] = a.iterations;
    j["events_logged"] = run.events.size();
    j.update(trace_summary(run.trace));
    emit(j);
}

// ---------------------------------------------------------------- lsq

struct LsqArgs {
    std::string dir;
    asyrk::LsqConfig cfg;
    double sigma_r = 0.0;
    std::string sampling = "uniform";
    std::string x_out;
    TraceOut out;
};

void cmd_lsq(const LsqArgs& a) {
    asyrk::Instance inst = asyrk::read_instance(a.dir);
    asyrk::LsqConfig cfg = a.cfg;
    cfg.sampling = parse_rk_sampling(a.sampling);
    if (a.sigma_r > 0.0) cfg.sigma_r = a.sigma_r;
    asyrk::LsqResult res = asyrk::lsq_solve(inst.A, inst.b, cfg);
    a.out.write(res.trace);
    if (!a.x_out.empty()) asyrk::write_vector(a.x_out, res.x_ls);
    json j;
    j["zeta"] = res.zeta;
    j["phi"] = res.phi;
    j["sigma_r"] = res.sigma_r;
    j["grad_norm"] = res.grad_norm;
    j.update(trace_summary(res.trace));
    emit(j);
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string dir;
    std::string threads = "1,2,4";
    std::string gamma = "corollary";
    asyrk::index_t tau = -1;
    asyrk::index_t epochs = 100;
    double target = 0.0;
    std::uint64_t seed = 0;
    std::string variant = "full-row";
    asyrk::index_t snapshot_interval = 1;
    int spectral_mode = 0;
    double tol = 1e-9;
    std::string csv;
    std::string json_out;
};

void cmd_sweep(const SweepArgs& a) {
    asyrk::Instance inst = asyrk::read_instance(a.dir);
    std::vector<asyrk::index_t> threads;
    std::size_t pos = 0;
    while (pos < a.threads.size()) {
        std::size_t comma = a.threads.find(',', pos);
        if (comma == std::string::npos) comma = a.threads.size();
        std::string tok = a.threads.substr(pos, comma - pos);
        try {
            threads.push_back(static_cast<asyrk::index_t>(std::stoll(tok)));
        } catch (const std::exception&) {
            throw UsageError("--threads: bad list entry: " + tok);
        }
        pos = comma + 1;
    }
    asyrk::RunConfig cfg;
    cfg.epochs = a.epochs;
    cfg.target_r_sq = a.target;
    cfg.seed = a.seed;
    cfg.snapshot_interval = a.snapshot_interval;
    if (a.variant == "full-row")
        cfg.variant = asyrk::UpdateVariant::full_row;
    else if (a.variant == "single")
        cfg.variant = asyrk::UpdateVariant::single_component;
    else
        throw UsageError("--variant: expected full-row|single, got " + a.variant);
    asyrk::index_t max_threads = *std::max_element(threads.begin(), threads.end());
    asyrk::index_t tau = a.tau >= 0 ? a.tau : max_threads - 1;
    if (a.gamma == "corollary") {
        asyrk::StepParams p =
            resolve_params(inst.A, a.gamma, tau, a.spectral_mode, a.tol, nullptr);
        cfg.gamma = p.gamma;
    } else {
        cfg.gamma = parse_number(a.gamma, "--gamma");
    }
    std::vector<double> x0(static_cast<std::size_t>(inst.A.cols()), 0.0);
    asyrk::SpeedupReport rep = asyrk::sweep_threads(inst.A, inst.b, x0, cfg, threads);
    if (!a.csv.empty()) asyrk::write_text(a.csv, rep.to_csv());
    if (!a.json_out.empty()) asyrk::write_text(a.json_out, rep.to_json() + "\n");
    std::cout << rep.to_json() << "\n";
}

// ---------------------------------------------------------------- rates

void cmd_rates(const std::string& dir, asyrk::index_t tau, bool as_json,
               int spectral_mode, double tol) {
    asyrk::Instance inst = asyrk::read_instance(dir);
    asyrk::SystemStats st = stats_for(inst.A, spectral_mode, tol);
    asyrk::RateReport rep = asyrk::rate_table(st, tau);
    if (as_json)
        std::cout << rep.to_json() << "\n";
    else
        std::cout << rep.to_text();
}

// ---------------------------------------------------------------- check

int cmd_check(std::uint64_t seed, bool quick) {
    asyrk::SelfCheckReport rep = asyrk::run_selfcheck(seed, quick);
    std::cout << rep.to_text();
    if (!rep.all_passed()) {
        asyrk::index_t failed = 0;
        for (const asyrk::CheckResult& r : rep.checks)
            if (!r.passed) ++failed;
        json err;
        err["error"] = "CheckFailed";
        err["message"] = std::to_string(failed) + " of " +
                         std::to_string(rep.checks.size()) +
                         " check suites failed";
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}

void add_spectral_flags(CLI::App* cmd, int* mode, double* tol) {
    cmd->add_flag_callback("--exact", [mode] { *mode = 1; },
                           "force dense spectral computation");
    cmd->add_flag_callback("--power", [mode] { *mode = 2; },
                           "force power iteration (lambda_min unavailable)");
    cmd->add_option("--spectral-tol", *tol, "power-iteration relative tolerance");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse row-projection solver bench: serial and asynchronous "
                 "shared-memory variants, delay simulator, step-size theory, "
                 "and least-squares extension"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* c_gen = app.add_subcommand("gen", "generate a sparse Gaussian instance");
    c_gen->add_option("--m", gen.spec.m, "rows")->required();
    c_gen->add_option("--n", gen.spec.n, "columns")->required();
    c_gen->add_option("--delta", gen.spec.delta, "nonzero fraction")->required();
    c_gen->add_option("--seed", gen.spec.seed, "RNG seed");
    c_gen->add_flag("--inconsistent", gen.inconsistent,
                    "make b infeasible (requires m > n)");
    c_gen->add_option("--noise", gen.spec.noise_level,
                      "residual magnitude for --inconsistent");
    c_gen->add_option("--out", gen.out, "instance directory")->required();

    std::string stats_dir, stats_out;
    int stats_mode = 0;
    double stats_tol = 1e-9;
    CLI::App* c_stats = app.add_subcommand("stats", "system statistics as JSON");
    c_stats->add_option("dir", stats_dir, "instance directory")->required();
    c_stats->add_option("--out", stats_out, "write JSON here instead of stdout");
    add_spectral_flags(c_stats, &stats_mode, &stats_tol);

    SolveRkArgs rk;
    CLI::App* c_rk = app.add_subcommand("solve-rk", "serial randomized row projection");
    c_rk->add_option("dir", rk.dir, "instance directory")->required();
    c_rk->add_option("--epochs", rk.cfg.max_epochs, "epoch cap");
    c_rk->add_option("--target", rk.cfg.target_r_sq, "stop when r_sq <= target");
    c_rk->add_option("--seed", rk.cfg.seed, "RNG seed");
    c_rk->add_option("--sampling", rk.sampling, "uniform|norm|shuffle");
    c_rk->add_flag("--no-dist", rk.no_dist, "skip dist_sq even when x_star is known");
    rk.out.add_flags(c_rk);

    SolveAsyrkArgs as;
    CLI::App* c_as = app.add_subcommand(
        "solve-asyrk", "lock-free shared-memory solver (threads=1 is serial-equivalent)");
    c_as->add_option("dir", as.dir, "instance directory")->required();
    c_as->add_option("--threads", as.threads, "worker count (default: ASYRK_THREADS or 1)");
    c_as->add_option("--gamma", as.gamma, "step size, a number or 'corollary'");
    c_as->add_option("--tau", as.tau, "staleness bound for the step-size rule "
                                      "(default: threads-1)");
    c_as->add_option("--epochs", as.epochs, "epoch cap");
    c_as->add_option("--target", as.target, "stop when r_sq <= target");
    c_as->add_option("--seed", as.seed, "RNG seed");
    c_as->add_option("--variant", as.variant, "full-row|single");
    c_as->add_option("--sampling", as.sampling, "slice|replacement");
    c_as->add_option("--snapshot-interval", as.snapshot_interval,
                     "epochs between residual measurements");
    c_as->add_flag("--instrument", as.instrument, "audit applied increments");
    c_as->add_flag("--no-dist", as.no_dist, "skip dist_sq even when x_star is known");
    add_spectral_flags(c_as, &as.spectral_mode, &as.tol);
    as.out.add_flags(c_as);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand(
        "simulate", "deterministic bounded-delay simulator (single thread)");
    c_sim->add_option("dir", sim.dir, "instance directory")->required();
    c_sim->add_option("--iterations", sim.iterations, "update events to run")->required();
    c_sim->add_option("--tau", sim.tau, "staleness bound");
    c_sim->add_option("--delay", sim.delay, "fixed|uniform|max");
    c_sim->add_option("--gamma", sim.gamma, "step size, a number or 'corollary'");
    c_sim->add_option("--variant", sim.variant, "single|full-row");
    c_sim->add_option("--seed", sim.seed, "RNG seed");
    c_sim->add_option("--runs", sim.runs, "independent runs; >1 reports mean "
                                          "residuals and consecutive ratios");
    c_sim->add_option("--probe-every", sim.probe_every,
                      "record r_sq (and dist_sq when the dense oracle fits) every k iterations");
    c_sim->add_option("--max-events", sim.max_events, "cap on logged update events");
    c_sim->add_option("--probe-csv", sim.probe_csv, "write probe series as CSV");
    c_sim->add_option("--ratios-csv", sim.ratios_csv,
                      "write mean residuals and ratios as CSV (--runs > 1)");
    add_spectral_flags(c_sim, &sim.spectral_mode, &sim.tol);
    sim.out.add_flags(c_sim);

    LsqArgs lsq;
    CLI::App* c_lsq = app.add_subcommand(
        "lsq", "least squares via the square augmented encoding");
    c_lsq->add_option("dir", lsq.dir, "instance directory")->required();
    c_lsq->add_option("--zeta", lsq.cfg.zeta, "coupling (default: optimal)");
    c_lsq->add_option("--phi", lsq.cfg.phi, "gradient-block scale (default: optimal)");
    c_lsq->add_option("--sigma-r", lsq.sigma_r,
                      "smallest nonzero singular value (skips the dense SVD)");
    c_lsq->add_option("--epochs", lsq.cfg.max_epochs, "epoch cap");
    c_lsq->add_option("--target", lsq.cfg.target_r_sq,
                      "stop threshold on the augmented residual");
    c_lsq->add_option("--seed", lsq.cfg.seed, "RNG seed");
    c_lsq->add_option("--sampling", lsq.sampling, "uniform|norm|shuffle");
    c_lsq->add_option("--x-out", lsq.x_out, "write x_ls, one value per line");
    lsq.out.add_flags(c_lsq, /*with_x=*/false);

    SweepArgs sweep;
    CLI::App* c_sweep = app.add_subcommand("sweep", "thread sweep to a common target");
    c_sweep->add_option("dir", sweep.dir, "instance directory")->required();
    c_sweep->add_option("--threads", sweep.threads, "comma list, e.g. 1,2,4");
    c_sweep->add_option("--gamma", sweep.gamma, "step size, a number or 'corollary'");
    c_sweep->add_option("--tau", sweep.tau,
                        "staleness bound for the step-size rule (default: max threads - 1)");
    c_sweep->add_option("--epochs", sweep.epochs, "epoch cap per run");
    c_sweep->add_option("--target", sweep.target, "stop when r_sq <= target");
    c_sweep->add_option("--seed", sweep.seed, "RNG seed");
    c_sweep->add_option("--variant", sweep.variant, "full-row|single");
    c_sweep->add_option("--snapshot-interval", sweep.snapshot_interval,
                        "epochs between residual measurements");
    c_sweep->add_option("--csv", sweep.csv, "write the sweep as CSV");
    c_sweep->add_option("--json-out", sweep.json_out, "write the sweep as JSON");
    add_spectral_flags(c_sweep, &sweep.spectral_mode, &sweep.tol);

    std::string rates_dir;
    asyrk::index_t rates_tau = 0;
    bool rates_json = false;
    int rates_mode = 0;
    double rates_tol = 1e-9;
    CLI::App* c_rates = app.add_subcommand(
        "rates", "complexity and rate estimates for the three methods");
    c_rates->add_option("dir", rates_dir, "instance directory")->required();
    c_rates->add_option("--tau", rates_tau, "staleness bound");
    c_rates->add_flag("--json", rates_json, "JSON instead of the text table");
    add_spectral_flags(c_rates, &rates_mode, &rates_tol);

    std::uint64_t check_seed = 0;
    bool check_quick = false;
    CLI::App* c_check = app.add_subcommand("check", "run the invariant suites");
    c_check->add_option("--seed", check_seed, "RNG seed");
    c_check->add_flag("--quick", check_quick, "smaller sample counts");

    try {
        app.parse(argc, argv);
        if (*c_gen) cmd_gen(gen);
        else if (*c_stats) cmd_stats(stats_dir, stats_mode, stats_tol, stats_out);
        else if (*c_rk) cmd_solve_rk(rk);
        else if (*c_as) cmd_solve_asyrk(as);
        else if (*c_sim) cmd_simulate(sim);
        else if (*c_lsq) cmd_lsq(lsq);
        else if (*c_sweep) cmd_sweep(sweep);
        else if (*c_rates) cmd_rates(rates_dir, rates_tau, rates_json, rates_mode, rates_tol);
        else if (*c_check) return cmd_check(check_seed, check_quick);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        json err;
        err["error"] = "UsageError";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const UsageError& e) {
        json err;
        err["error"] = "UsageError";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const asyrk::Error& e) {
        json err;
        err["error"] = asyrk::error_code_name(e.code());
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "Internal";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

// Python bindings: thin dict-in/dict-out wrappers over the core operations.
// Matrices cross the boundary as parallel triplet lists (rows, cols, vals);
// the wrappers normalize rows before calling theory-facing code.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "asyrk/datagen.hpp"
#include "asyrk/delay_sim.hpp"
#include "asyrk/error.hpp"
#include "asyrk/kaczmarz.hpp"
#include "asyrk/lsq.hpp"
#include "asyrk/parallel.hpp"
#include "asyrk/selfcheck.hpp"
#include "asyrk/stats.hpp"
#include "asyrk/stepsize.hpp"
#include "asyrk/trace.hpp"

namespace py = pybind11;
using namespace asyrk;

namespace {

CsrMatrix build_matrix(index_t m, index_t n, const std::vector<index_t>& rows,
                       const std::vector<index_t>& cols,
                       const std::vector<double>& vals) {
    if (rows.size() != cols.size() || rows.size() != vals.size())
        fail(ErrorCode::DimensionMismatch, "triplet lists differ in length");
    std::vector<Triplet> trips(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
        trips[k] = {rows[k], cols[k], vals[k]};
    return CsrMatrix::from_triplets(trips, m, n);
}

py::dict matrix_dict(const CsrMatrix& A) {
    std::vector<index_t> rows, cols;
    std::vector<double> vals;
    rows.reserve(static_cast<std::size_t>(A.nnz()));
    cols.reserve(static_cast<std::size_t>(A.nnz()));
    vals.reserve(static_cast<std::size_t>(A.nnz()));
    for (const Triplet& t : A.to_triplets()) {
        rows.push_back(t.row);
        cols.push_back(t.col);
        vals.push_back(t.value);
    }
    py::dict d;
    d["m"] = A.rows();
    d["n"] = A.cols();
    d["rows"] = rows;
    d["cols"] = cols;
    d["vals"] = vals;
    d["normalized"] = A.is_normalized();
    return d;
}

py::dict trace_dict(const Trace& tr) {
    std::vector<index_t> epoch, updates;
    std::vector<double> r_sq, grad_sq, wall;
    std::vector<double> dist;
    bool has_dist = !tr.epochs.empty() && tr.epochs.front().dist_sq.has_value();
    for (const EpochRecord& e : tr.epochs) {
        epoch.push_back(e.epoch_index);
        r_sq.push_back(e.r_sq);
        grad_sq.push_back(e.grad_sq);
        wall.push_back(e.wall_seconds);
        updates.push_back(e.updates_applied);
        if (has_dist && e.dist_sq) dist.push_back(*e.dist_sq);
    }
    py::dict d;
    d["epoch_index"] = epoch;
    d["r_sq"] = r_sq;
    d["grad_sq"] = grad_sq;
    if (has_dist) d["dist_sq"] = dist;
    d["wall_seconds"] = wall;
    d["updates_applied"] = updates;
    d["final_x"] = tr.final_x;
    d["config"] = tr.config_echo;
    return d;
}

Sampling sampling_from(const std::string& s) {
    if (s == "uniform") return Sampling::uniform;
    if (s == "norm" || s == "norm-proportional") return Sampling::norm_proportional;
    if (s == "shuffle") return Sampling::shuffle;
    fail(ErrorCode::InvalidArgument, "sampling: expected uniform|norm|shuffle");
}

UpdateVariant variant_from(const std::string& s) {
    if (s == "full-row" || s == "full_row") return UpdateVariant::full_row;
    if (s == "single" || s == "single_component")
        return UpdateVariant::single_component;
    fail(ErrorCode::InvalidArgument, "variant: expected full-row|single");
}

py::dict generate(index_t m, index_t n, double delta, std::uint64_t seed,
                  bool consistent, double noise_level) {
    GenSpec spec{m, n, delta, seed, consistent, noise_level};
    Instance inst = gen_sparse_gaussian(spec);
    py::dict d = matrix_dict(inst.A);
    d["b"] = inst.b;
    if (inst.x_star)
        d["x_star"] = *inst.x_star;
    else
        d["x_star"] = py::none();
    return d;
}

py::dict system_stats(index_t m, index_t n, const std::vector<index_t>& rows,
                      const std::vector<index_t>& cols,
                      const std::vector<double>& vals) {
    CsrMatrix A = build_matrix(m, n, rows, cols, vals);
    std::vector<double> dummy(static_cast<std::size_t>(m), 0.0);
    auto [N, ignored] = normalize_rows(A, dummy);
    SystemStats st = compute_stats(N);
    py::dict d;
    d["m"] = st.m;
    d["n"] = st.n;
    d["delta"] = st.delta;
    d["theta"] = st.theta;
    d["mu"] = st.mu;
    d["nu"] = st.nu;
    d["alpha"] = st.alpha;
    d["lambda_max"] = st.lambda_max;
    if (st.lambda_min) d["lambda_min"] = *st.lambda_min;
    if (st.sigma_r) d["sigma_r"] = *st.sigma_r;
    d["frob_sq"] = st.frob_sq;
    d["l_max"] = st.l_max;
    d["l_res"] = st.l_res;
    return d;
}

py::dict step_params(index_t m, index_t n, const std::vector<index_t>& rows,
                     const std::vector<index_t>& cols,
                     const std::vector<double>& vals, index_t tau) {
    CsrMatrix A = build_matrix(m, n, rows, cols, vals);
    std::vector<double> dummy(static_cast<std::size_t>(m), 0.0);
    auto [N, ignored] = normalize_rows(A, dummy);
    StepParams p = corollary_params(compute_stats(N), tau);
    py::dict d;
    d["tau"] = p.tau;
    d["rho"] = p.rho;
    d["psi"] = p.psi;
    d["feasible"] = p.feasible;
    d["gamma"] = p.gamma;
    d["bounds"] = py::make_tuple(p.gamma_bounds.b1, p.gamma_bounds.b2,
                                 p.gamma_bounds.b3);
    if (p.rate_iter) d["rate_iteration"] = *p.rate_iter;
    if (p.rate_simplified) d["rate_simplified"] = *p.rate_simplified;
    return d;
}

py::dict solve_rk_py(index_t m, index_t n, const std::vector<index_t>& rows,
                     const std::vector<index_t>& cols,
                     const std::vector<double>& vals,
                     const std::vector<double>& b, index_t epochs,
                     double target, std::uint64_t seed,
                     const std::string& sampling) {
    CsrMatrix A0 = build_matrix(m, n, rows, cols, vals);
    auto [A, bn] = normalize_rows(A0, b);
    RkConfig cfg;
    cfg.max_epochs = epochs;
    cfg.target_r_sq = target;
    cfg.seed = seed;
    cfg.sampling = sampling_from(sampling);
    std::vector<double> x0(static_cast<std::size_t>(n), 0.0);
    return trace_dict(rk_solve(A, bn, x0, cfg));
}

py::dict solve_parallel_py(index_t m, index_t n,
                           const std::vector<index_t>& rows,
                           const std::vector<index_t>& cols,
                           const std::vector<double>& vals,
                           const std::vector<double>& b, index_t threads,
                           double gamma, index_t epochs, double target,
                           std::uint64_t seed, const std::string& variant) {
    CsrMatrix A0 = build_matrix(m, n, rows, cols, vals);
    auto [A, bn] = normalize_rows(A0, b);
    RunConfig cfg;
    cfg.threads = threads;
    cfg.gamma = gamma;
    cfg.epochs = epochs;
    cfg.target_r_sq = target;
    cfg.seed = seed;
    cfg.variant = variant_from(variant);
    std::vector<double> x0(static_cast<std::size_t>(n), 0.0);
    InstrumentReport rep;
    Trace tr = solve_parallel(A, bn, x0, cfg, &rep);
    py::dict d = trace_dict(tr);
    d["instrument"] =
        py::dict(py::arg("row_updates") = rep.row_updates,
                 py::arg("increments") = rep.increments,
                 py::arg("max_abs_error") = rep.max_abs_error,
                 py::arg("tolerance") = rep.tolerance,
                 py::arg("consistent") = rep.consistent);
    return d;
}

py::dict simulate_py(index_t m, index_t n, const std::vector<index_t>& rows,
                     const std::vector<index_t>& cols,
                     const std::vector<double>& vals,
                     const std::vector<double>& b, index_t iterations,
                     index_t tau, double gamma, const std::string& delay,
                     const std::string& variant, std::uint64_t seed) {
    CsrMatrix A0 = build_matrix(m, n, rows, cols, vals);
    auto [A, bn] = normalize_rows(A0, b);
    StepParams p = corollary_params(compute_stats(A), tau);
    p.gamma = gamma;
    DelayModel dm;
    if (delay == "fixed") dm = DelayModel::fixed(tau);
    else if (delay == "uniform") dm = DelayModel::uniform_random(tau);
    else if (delay == "max") dm = DelayModel::max_staleness(tau);
    else fail(ErrorCode::InvalidArgument, "delay: expected fixed|uniform|max");
    std::vector<double> x0(static_cast<std::size_t>(n), 0.0);
    SimRun run = simulate(A, bn, x0, p, dm, iterations, seed,
                          variant_from(variant), {});
    py::dict d = trace_dict(run.trace);
    d["gamma"] = p.gamma;
    d["rho"] = p.rho;
    d["psi"] = p.psi;
    return d;
}

py::dict lsq_py(index_t m, index_t n, const std::vector<index_t>& rows,
                const std::vector<index_t>& cols,
                const std::vector<double>& vals, const std::vector<double>& b,
                index_t epochs, double target, std::uint64_t seed) {
    CsrMatrix A0 = build_matrix(m, n, rows, cols, vals);
    auto [A, bn] = normalize_rows(A0, b);
    LsqConfig cfg;
    cfg.max_epochs = epochs;
    cfg.target_r_sq = target;
    cfg.seed = seed;
    LsqResult res = lsq_solve(A, bn, cfg);
    py::dict d;
    d["x_ls"] = res.x_ls;
    d["grad_norm"] = res.grad_norm;
    d["zeta"] = res.zeta;
    d["phi"] = res.phi;
    d["sigma_r"] = res.sigma_r;
    d["trace"] = trace_dict(res.trace);
    return d;
}

py::dict selfcheck_py(std::uint64_t seed, bool quick) {
    SelfCheckReport rep = run_selfcheck(seed, quick);
    py::list checks;
    for (const CheckResult& r : rep.checks) {
        py::dict c;
        c["name"] = r.name;
        c["passed"] = r.passed;
        c["detail"] = r.detail;
        checks.append(c);
    }
    py::dict d;
    d["all_passed"] = rep.all_passed();
    d["checks"] = checks;
    return d;
}

} // namespace

PYBIND11_MODULE(_asyrk, mod) {
    mod.doc() = "Sparse row-projection solvers: serial, asynchronous "
                "shared-memory, bounded-delay simulation, step-size theory, "
                "and the least-squares extension.";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            std::string text = std::string(error_code_name(e.code())) + ": " +
                               e.what();
            PyErr_SetString(PyExc_ValueError, text.c_str());
        }
    });

    mod.def("generate", &generate, py::arg("m"), py::arg("n"),
            py::arg("delta"), py::arg("seed") = 0,
            py::arg("consistent") = true, py::arg("noise_level") = 0.0,
            "Sparse Gaussian instance with normalized rows; returns triplets, "
            "b, and x_star (None when inconsistent).");
    mod.def("system_stats", &system_stats, py::arg("m"), py::arg("n"),
            py::arg("rows"), py::arg("cols"), py::arg("vals"),
            "Structural and spectral statistics (rows normalized first).");
    mod.def("step_params", &step_params, py::arg("m"), py::arg("n"),
            py::arg("rows"), py::arg("cols"), py::arg("vals"), py::arg("tau"),
            "Staleness-aware step size and rate bounds for delay bound tau.");
    mod.def("solve_rk", &solve_rk_py, py::arg("m"), py::arg("n"),
            py::arg("rows"), py::arg("cols"), py::arg("vals"), py::arg("b"),
            py::arg("epochs") = 100, py::arg("target") = 0.0,
            py::arg("seed") = 0, py::arg("sampling") = "uniform",
            "Serial randomized row-projection solve from x0 = 0.");
    mod.def("solve_parallel", &solve_parallel_py, py::arg("m"), py::arg("n"),
            py::arg("rows"), py::arg("cols"), py::arg("vals"), py::arg("b"),
            py::arg("threads") = 1, py::arg("gamma") = 1.0,
            py::arg("epochs") = 100, py::arg("target") = 0.0,
            py::arg("seed") = 0, py::arg("variant") = "full-row",
            "Lock-free shared-memory solve; returns the trace plus an "
            "instrument report of applied increments.");
    mod.def("simulate", &simulate_py, py::arg("m"), py::arg("n"),
            py::arg("rows"), py::arg("cols"), py::arg("vals"), py::arg("b"),
            py::arg("iterations"), py::arg("tau"), py::arg("gamma"),
            py::arg("delay") = "uniform", py::arg("variant") = "single",
            py::arg("seed") = 0,
            "Deterministic bounded-delay simulation of the asynchronous "
            "update recursion.");
    mod.def("lsq", &lsq_py, py::arg("m"), py::arg("n"), py::arg("rows"),
            py::arg("cols"), py::arg("vals"), py::arg("b"),
            py::arg("epochs") = 5000, py::arg("target") = 0.0,
            py::arg("seed") = 0,
            "Least squares through the square augmented encoding with the "
            "optimal coupling parameters.");
    mod.def("selfcheck", &selfcheck_py, py::arg("seed") = 0,
            py::arg("quick") = true, "Run the randomized invariant suites.");
}

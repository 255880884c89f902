#include "helpers.hpp"

#include <asyrk/kaczmarz.hpp>
#include <asyrk/parallel.hpp>

using namespace asyrk;
using testutil::check_error;
using testutil::same_bits;

TEST_CASE("one worker with slice shuffle equals the serial shuffled solver") {
    auto inst = gen_sparse_gaussian({30, 15, 0.25, 61, true, 0.0});
    std::vector<double> x0(15, 0.0);

    RkConfig rk;
    rk.max_epochs = 10;
    rk.seed = 21;
    rk.sampling = Sampling::shuffle;
    rk.x_star = &*inst.x_star;
    auto serial = rk_solve(inst.A, inst.b, x0, rk);

    RunConfig par;
    par.threads = 1;
    par.gamma = 1.0;
    par.epochs = 10;
    par.seed = 21;
    par.variant = UpdateVariant::full_row;
    par.sampling = ParSampling::slice_shuffle;
    par.x_star = &*inst.x_star;
    auto trace = solve_parallel(inst.A, inst.b, x0, par);

    REQUIRE(trace.epochs.size() == serial.epochs.size());
    for (std::size_t k = 0; k < serial.epochs.size(); ++k) {
        CHECK(trace.epochs[k].epoch_index == serial.epochs[k].epoch_index);
        CHECK(trace.epochs[k].r_sq == serial.epochs[k].r_sq);
        CHECK(trace.epochs[k].grad_sq == serial.epochs[k].grad_sq);
        REQUIRE(trace.epochs[k].dist_sq.has_value());
        REQUIRE(serial.epochs[k].dist_sq.has_value());
        CHECK(*trace.epochs[k].dist_sq == *serial.epochs[k].dist_sq);
        CHECK(trace.epochs[k].updates_applied ==
              serial.epochs[k].updates_applied);
    }
    CHECK(same_bits(trace.final_x, serial.final_x));
}

TEST_CASE("snapshot interval thins the records but keeps the endpoints") {
    auto inst = gen_sparse_gaussian({24, 12, 0.3, 67, true, 0.0});
    std::vector<double> x0(12, 0.0);
    RunConfig cfg;
    cfg.threads = 1;
    cfg.gamma = 1.0;
    cfg.epochs = 10;
    cfg.snapshot_interval = 4;
    auto tr = solve_parallel(inst.A, inst.b, x0, cfg);
    REQUIRE(tr.epochs.size() >= 2);
    CHECK(tr.epochs.front().epoch_index == 0);
    CHECK(tr.epochs.back().epoch_index == 10);
    CHECK(tr.epochs.back().updates_applied == 10 * 24);
    for (std::size_t k = 1; k < tr.epochs.size(); ++k)
        CHECK(tr.epochs[k].epoch_index > tr.epochs[k - 1].epoch_index);
}

TEST_CASE("instrumented run replays as x0 plus the sum of increments") {
    auto inst = gen_sparse_gaussian({48, 16, 0.3, 71, true, 0.0});
    std::vector<double> x0(16, 0.0);
    for (index_t threads : {2, 4}) {
        for (auto variant :
             {UpdateVariant::full_row, UpdateVariant::single_component}) {
            RunConfig cfg;
            cfg.threads = threads;
            cfg.variant = variant;
            cfg.gamma =
                variant == UpdateVariant::full_row ? 0.9 : 0.05;
            cfg.epochs = 40;
            cfg.seed = 5;
            InstrumentReport rep;
            auto tr = solve_parallel(inst.A, inst.b, x0, cfg, &rep);
            CHECK(rep.consistent);
            CHECK(rep.max_abs_error <= rep.tolerance);
            CHECK(rep.row_updates >= 40 * 48);
            CHECK(rep.row_updates < 40 * 48 + threads);
            CHECK(rep.increments >= rep.row_updates);
            CHECK(tr.epochs.back().updates_applied == rep.row_updates);
        }
    }
}

TEST_CASE("with-replacement sampling converges too") {
    auto inst = gen_sparse_gaussian({40, 20, 0.25, 73, true, 0.0});
    std::vector<double> x0(20, 0.0);
    RunConfig cfg;
    cfg.threads = 2;
    cfg.sampling = ParSampling::with_replacement;
    cfg.gamma = 1.0;
    cfg.epochs = 200;
    cfg.target_r_sq = 1e-12;
    auto tr = solve_parallel(inst.A, inst.b, x0, cfg);
    CHECK(tr.epochs.back().r_sq <= 1e-10);
}

TEST_CASE("a divergent step size is reported, not returned") {
    auto inst = gen_sparse_gaussian({20, 10, 0.4, 79, true, 0.0});
    std::vector<double> x0(10, 0.0);
    RunConfig cfg;
    cfg.threads = 1;
    cfg.gamma = 1000.0;
    cfg.epochs = 200;
    check_error([&] { solve_parallel(inst.A, inst.b, x0, cfg); },
                ErrorCode::NonFinite);
}

TEST_CASE("starting at the solution returns immediately") {
    auto inst = gen_sparse_gaussian({20, 10, 0.4, 83, true, 0.0});
    RunConfig cfg;
    cfg.threads = 4;
    cfg.epochs = 50;
    auto tr = solve_parallel(inst.A, inst.b, *inst.x_star, cfg);
    REQUIRE(tr.epochs.size() == 1);
    CHECK(tr.epochs[0].r_sq == 0.0);
}

TEST_CASE("solve_parallel validates its configuration") {
    auto inst = gen_sparse_gaussian({10, 5, 0.5, 89, true, 0.0});
    std::vector<double> x0(5, 0.0);
    RunConfig cfg;
    cfg.threads = 0;
    check_error([&] { solve_parallel(inst.A, inst.b, x0, cfg); },
                ErrorCode::InvalidArgument);
    cfg.threads = 1;
    cfg.snapshot_interval = 0;
    check_error([&] { solve_parallel(inst.A, inst.b, x0, cfg); },
                ErrorCode::InvalidArgument);
}

TEST_CASE("sweep_threads reports speedups relative to one worker") {
    auto inst = gen_sparse_gaussian({60, 30, 0.2, 97, true, 0.0});
    std::vector<double> x0(30, 0.0);
    RunConfig cfg;
    cfg.gamma = 1.0;
    cfg.epochs = 30;
    std::vector<index_t> threads = {1, 2};
    auto rep = sweep_threads(inst.A, inst.b, x0, cfg, threads);
    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.entries[0].threads == 1);
    CHECK(rep.entries[0].speedup == 1.0);
    CHECK(rep.entries[0].wall_seconds > 0.0);
    CHECK(rep.entries[1].threads == 2);
    CHECK(rep.entries[1].speedup > 0.0);
    CHECK(rep.to_json().find("speedup") != std::string::npos);
    CHECK(rep.to_csv().rfind("threads,", 0) == 0);

    SUBCASE("the baseline thread count is mandatory") {
        std::vector<index_t> no_base = {2, 4};
        check_error([&] { sweep_threads(inst.A, inst.b, x0, cfg, no_base); },
                    ErrorCode::InvalidArgument);
    }
}

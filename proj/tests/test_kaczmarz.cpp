#include "helpers.hpp"

#include <asyrk/dense.hpp>
#include <asyrk/kaczmarz.hpp>
#include <asyrk/rng.hpp>

using namespace asyrk;
using testutil::check_error;
using testutil::same_bits;

TEST_CASE("rk_step projects exactly onto the selected hyperplane") {
    auto I = testutil::identity_csr(2);
    std::vector<double> b = {1.0, 2.0};
    std::vector<double> x = {0.0, 0.0};
    auto x1 = rk_step(I, b, x, 0);
    CHECK(x1[0] == doctest::Approx(1.0));
    CHECK(x1[1] == 0.0);
    CHECK(I.row_dot(0, x1) - b[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rk_step on row (0.6, 0.8), b = 2, from the origin") {
    std::vector<Triplet> t = {{0, 0, 3.0}, {0, 1, 4.0}};
    auto A = CsrMatrix::from_triplets(t, 1, 2);
    std::vector<double> braw = {10.0};
    auto [N, b] = normalize_rows(A, braw);
    std::vector<double> x = {0.0, 0.0};
    auto x1 = rk_step(N, b, x, 0);
    CHECK(x1[0] == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(x1[1] == doctest::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("rk_step is a fixed point on a satisfied row") {
    auto A = testutil::three_row_example();
    std::vector<double> x = {1.2, 1.6};
    std::vector<double> b = {A.row_dot(0, x), A.row_dot(1, x),
                             A.row_dot(2, x)};
    auto x1 = rk_step(A, b, x, 2);
    CHECK(same_bits(x1, x));
}

TEST_CASE("asyrk_update single-component increment") {
    auto A = testutil::three_row_example();
    std::vector<double> b = {0.0, 0.0, 0.0};

    SUBCASE("zero residual gives a zero increment") {
        std::vector<double> x = {0.0, 0.0};
        CHECK(asyrk_update(A, b, 0, 0, 1.0, x) == 0.0);
    }
    SUBCASE("singleton row recovers the coordinate in one step") {
        std::vector<double> x = {3.0, 0.0};
        std::vector<double> b1 = {4.0, 0.0, 0.0};
        // theta = 1, gamma = 1: increment equals b - x exactly
        CHECK(asyrk_update(A, b1, 0, 0, 1.0, x) == doctest::Approx(1.0));
    }
    SUBCASE("third row, component 1, gamma 0.5 from x_read = (1, 0)") {
        std::vector<double> x = {1.0, 0.0};
        // -gamma * theta * a_it * (a_i . x - b_i) = -0.5 * 2 * .5
        CHECK(asyrk_update(A, b, 2, 1, 0.5, x) ==
              doctest::Approx(-0.5).epsilon(1e-14));
    }
    SUBCASE("component outside the row support is rejected") {
        std::vector<double> x = {0.0, 0.0};
        check_error([&] { asyrk_update(A, b, 0, 1, 1.0, x); },
                    ErrorCode::ComponentNotInSupport);
    }
}

TEST_CASE("rk_solve on the identity visits every row once per shuffled epoch") {
    auto I = testutil::identity_csr(4);
    std::vector<double> b = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> x0(4, 0.0);
    RkConfig cfg;
    cfg.max_epochs = 3;
    cfg.sampling = Sampling::shuffle;
    cfg.seed = 9;
    auto tr = rk_solve(I, b, x0, cfg);
    // after one full pass the solution is exact; the solve stops there
    REQUIRE(tr.epochs.size() == 2);
    CHECK(tr.epochs[1].r_sq == 0.0);
    CHECK(tr.epochs[1].updates_applied == 4);
    CHECK(same_bits(tr.final_x, b));
}

TEST_CASE("rk_solve started at the solution records a single epoch") {
    auto inst = gen_sparse_gaussian({20, 10, 0.3, 41, true, 0.0});
    RkConfig cfg;
    cfg.max_epochs = 50;
    auto tr = rk_solve(inst.A, inst.b, *inst.x_star, cfg);
    REQUIRE(tr.epochs.size() == 1);
    CHECK(tr.epochs[0].r_sq == 0.0);
    CHECK(same_bits(tr.final_x, *inst.x_star));
}

TEST_CASE("rk_solve is deterministic in the seed") {
    auto inst = gen_sparse_gaussian({30, 15, 0.25, 43, true, 0.0});
    std::vector<double> x0(15, 0.0);
    RkConfig cfg;
    cfg.max_epochs = 20;
    cfg.seed = 77;
    auto a = rk_solve(inst.A, inst.b, x0, cfg);
    auto b2 = rk_solve(inst.A, inst.b, x0, cfg);
    CHECK(same_bits(a.final_x, b2.final_x));
    cfg.seed = 78;
    auto c = rk_solve(inst.A, inst.b, x0, cfg);
    CHECK_FALSE(same_bits(a.final_x, c.final_x));
}

TEST_CASE("distance to the solution never increases under exact projections") {
    auto inst = gen_sparse_gaussian({40, 20, 0.2, 47, true, 0.0});
    std::vector<double> x0(20, 0.0);
    RkConfig cfg;
    cfg.max_epochs = 30;
    cfg.seed = 5;
    cfg.x_star = &*inst.x_star;
    auto tr = rk_solve(inst.A, inst.b, x0, cfg);
    REQUIRE(tr.epochs.size() >= 2);
    for (std::size_t k = 1; k < tr.epochs.size(); ++k) {
        REQUIRE(tr.epochs[k].dist_sq.has_value());
        CHECK(*tr.epochs[k].dist_sq <=
              *tr.epochs[k - 1].dist_sq * (1 + 1e-12) + 1e-300);
    }
}

TEST_CASE("uniform sampling demands normalized rows") {
    std::vector<Triplet> t = {{0, 0, 2.0}, {1, 1, 1.0}};
    auto A = CsrMatrix::from_triplets(t, 2, 2);
    std::vector<double> b = {2.0, 1.0};
    std::vector<double> x0 = {0.0, 0.0};
    RkConfig cfg;
    check_error([&] { rk_solve(A, b, x0, cfg); }, ErrorCode::NotNormalized);

    // norm-proportional sampling handles unnormalized rows
    cfg.sampling = Sampling::norm_proportional;
    cfg.max_epochs = 60;
    auto tr = rk_solve(A, b, x0, cfg);
    CHECK(tr.epochs.back().r_sq <= 1e-20);
}

TEST_CASE("project_solution_set lands on the affine solution set") {
    auto inst = gen_sparse_gaussian({25, 40, 0.15, 53, true, 0.0});
    auto gen = make_stream(4, 0);
    std::vector<double> x(40);
    for (auto& v : x) v = standard_normal(gen);
    auto z = project_solution_set(inst.A, inst.b, x);
    auto r = residuals(inst.A, z, inst.b);
    CHECK(r.r_sq <= 1e-18);
    // projecting a point of the set returns it
    auto z2 = project_solution_set(inst.A, inst.b, z);
    for (std::size_t j = 0; j < z.size(); ++j)
        CHECK(z2[j] == doctest::Approx(z[j]).epsilon(1e-10));
}

TEST_CASE("alias table reproduces the target distribution") {
    std::vector<double> w = {1.0, 2.0, 3.0};
    AliasTable tab(w);
    auto gen = make_stream(123, 0);
    std::vector<index_t> counts(3, 0);
    const int draws = 200000;
    for (int k = 0; k < draws; ++k) counts[tab.sample(gen)]++;
    for (int i = 0; i < 3; ++i) {
        const double want = w[i] / 6.0;
        const double got = static_cast<double>(counts[i]) / draws;
        CHECK(std::abs(got - want) < 0.005);
    }
    check_error([] { AliasTable tab2(std::vector<double>{}); },
                ErrorCode::InvalidArgument);
    check_error([] { AliasTable tab3(std::vector<double>{0.0, 0.0}); },
                ErrorCode::InvalidArgument);
}

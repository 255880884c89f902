#include "helpers.hpp"

#include <asyrk/stats.hpp>

using namespace asyrk;
using testutil::check_error;

TEST_CASE("compute_stats on the identity") {
    auto I = testutil::identity_csr(3);
    auto st = compute_stats(I);
    CHECK(st.m == 3);
    CHECK(st.n == 3);
    CHECK(st.delta == doctest::Approx(1.0 / 3.0));
    CHECK(st.theta == std::vector<index_t>{1, 1, 1});
    CHECK(st.mu == 1);
    CHECK(st.nu == 1);
    CHECK(st.alpha == doctest::Approx(1.0));
    CHECK(st.lambda_max == doctest::Approx(1.0));
    REQUIRE(st.lambda_min.has_value());
    CHECK(*st.lambda_min == doctest::Approx(1.0));
    CHECK(st.frob_sq == doctest::Approx(3.0));
    CHECK(st.l_max == doctest::Approx(1.0));
    CHECK(st.l_res == doctest::Approx(1.0));
    REQUIRE(st.sigma_r.has_value());
    CHECK(*st.sigma_r == doctest::Approx(1.0));
}

TEST_CASE("compute_stats on rows e1, e2, (sqrt(.5), sqrt(.5))") {
    auto A = testutil::three_row_example();
    auto st = compute_stats(A);
    CHECK(st.frob_sq == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(st.theta == std::vector<index_t>{1, 1, 2});
    CHECK(st.mu == 2);
    CHECK(st.nu == 2);
    // max over (i,t) of theta_i |a_it| ||column_t|| is attained on row 2
    CHECK(st.alpha == doctest::Approx(1.7320508075688772).epsilon(1e-14));
    CHECK(st.l_max == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(st.l_res == doctest::Approx(1.5811388300841898).epsilon(1e-14));
    // Gram matrix [[1.5,.5],[.5,1.5]] has eigenvalues {1, 2}
    CHECK(st.lambda_max == doctest::Approx(2.0).epsilon(1e-12));
    REQUIRE(st.lambda_min.has_value());
    CHECK(*st.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(st.sigma_r.has_value());
    CHECK(*st.sigma_r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power iteration agrees with the exact lambda_max") {
    auto inst = gen_sparse_gaussian({200, 120, 0.05, 29, true, 0.0});
    StatsOptions exact;
    exact.exact_spectral = true;
    auto se = compute_stats(inst.A, exact);
    StatsOptions power;
    power.exact_spectral = false;
    power.tol = 1e-9;
    auto sp = compute_stats(inst.A, power);
    CHECK(sp.lambda_max ==
          doctest::Approx(se.lambda_max).epsilon(1e-6));
    CHECK_FALSE(sp.lambda_min.has_value());

    double direct = power_iteration_lambda_max(inst.A, 1e-10, 200000);
    CHECK(direct == doctest::Approx(se.lambda_max).epsilon(1e-6));
}

TEST_CASE("compute_stats requires normalized rows") {
    std::vector<Triplet> t = {{0, 0, 2.0}, {1, 1, 1.0}};
    auto A = CsrMatrix::from_triplets(t, 2, 2);
    check_error([&] { compute_stats(A); }, ErrorCode::NotNormalized);
}

TEST_CASE("stats JSON round-trip preserves every field") {
    auto inst = gen_sparse_gaussian({40, 25, 0.2, 31, true, 0.0});
    auto st = compute_stats(inst.A);
    auto rt = SystemStats::from_json(st.to_json());
    CHECK(rt.m == st.m);
    CHECK(rt.n == st.n);
    CHECK(rt.delta == st.delta);
    CHECK(rt.theta == st.theta);
    CHECK(rt.mu == st.mu);
    CHECK(rt.nu == st.nu);
    CHECK(rt.alpha == st.alpha);
    CHECK(rt.lambda_max == st.lambda_max);
    REQUIRE(rt.lambda_min.has_value() == st.lambda_min.has_value());
    if (st.lambda_min) CHECK(*rt.lambda_min == *st.lambda_min);
    CHECK(rt.frob_sq == st.frob_sq);
    CHECK(rt.l_max == st.l_max);
    CHECK(rt.l_res == st.l_res);
    REQUIRE(rt.sigma_r.has_value() == st.sigma_r.has_value());
    if (st.sigma_r) CHECK(*rt.sigma_r == *st.sigma_r);
}

TEST_CASE("structural bounds hold on random instances") {
    std::uint64_t seed = 1000;
    for (int k = 0; k < 20; ++k) {
        GenSpec spec;
        spec.m = 10 + 3 * k;
        spec.n = 8 + 2 * k;
        spec.delta = 0.3;
        spec.seed = seed++;
        auto inst = gen_sparse_gaussian(spec);
        auto st = compute_stats(inst.A);
        const double mu = static_cast<double>(st.mu);
        const double nu = static_cast<double>(st.nu);
        CHECK(st.alpha <= std::sqrt(nu) * mu * (1 + 1e-12));
        CHECK(st.alpha <= std::sqrt(st.lambda_max) * mu * (1 + 1e-12));
        CHECK(st.lambda_max <= mu * nu * (1 + 1e-12));
        CHECK(st.frob_sq ==
              doctest::Approx(static_cast<double>(st.m)).epsilon(1e-12));
        CHECK(st.lambda_max >=
              static_cast<double>(st.m) / static_cast<double>(st.n) - 1e-12);
        CHECK(st.l_max <= st.l_res * (1 + 1e-12));
        CHECK(st.l_res <= st.lambda_max * (1 + 1e-12));
    }
}

TEST_CASE("approximate spectral mode omits the dense-only fields") {
    // two wrapped diagonals keep every row and column populated; the
    // power-iteration path must leave lambda_min/sigma_r unset
    const index_t m = 2500, n = 1700;
    std::vector<Triplet> t;
    for (index_t i = 0; i < m; ++i) {
        t.push_back({i, i % n, 1.0});
        t.push_back({i, (i + 7) % n, 0.5});
    }
    auto A = CsrMatrix::from_triplets(t, m, n);
    auto [N, nb] = normalize_rows(A, std::vector<double>(m, 0.0));
    StatsOptions opts;
    opts.exact_spectral = false;
    auto st = compute_stats(N, opts);
    CHECK(st.lambda_max > 0.0);
    CHECK_FALSE(st.lambda_min.has_value());
    CHECK_FALSE(st.sigma_r.has_value());
}

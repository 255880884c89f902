#include "helpers.hpp"

#include <algorithm>
#include <cmath>

#include <asyrk/dense.hpp>
#include <asyrk/lsq.hpp>

using namespace asyrk;
using testutil::check_error;

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

TEST_CASE("optimal_params") {
    auto [phi, zeta] = optimal_params(std::sqrt(2.0));
    CHECK(phi == 1.0);
    CHECK(zeta == doctest::Approx(1.0).epsilon(1e-15));
    auto [phi1, zeta1] = optimal_params(1.0);
    CHECK(phi1 == 1.0);
    CHECK(zeta1 ==
          doctest::Approx(0.70710678118654746).epsilon(1e-15));
    check_error([] { optimal_params(0.0); }, ErrorCode::NonPositiveSigma);
    check_error([] { optimal_params(-1.0); }, ErrorCode::NonPositiveSigma);
}

TEST_CASE("critical_ratio peaks at the derived parameters") {
    const double sigma = 0.7;
    const double frob = 30.0;
    const index_t m = 40;
    auto [phi_s, zeta_s] = optimal_params(sigma);

    SUBCASE("the two eigenvalue branches balance at the optimum") {
        const double lower = zeta_s;
        const double upper =
            -zeta_s / 2.0 +
            0.5 * std::sqrt(zeta_s * zeta_s + 4.0 * phi_s * sigma * sigma);
        CHECK(lower == doctest::Approx(upper).epsilon(1e-12));
    }
    SUBCASE("value at the optimum") {
        const double got = critical_ratio(sigma, frob, m, zeta_s, phi_s);
        const double want =
            sigma * sigma / (4.0 * frob + static_cast<double>(m) * sigma * sigma);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("unimodal in zeta with the peak at zeta_star") {
        std::vector<double> vals;
        int best = -1;
        double best_v = -1.0;
        const int cells = 41;
        for (int k = 0; k < cells; ++k) {
            const double z =
                zeta_s * std::pow(10.0, -1.0 + 2.0 * k / (cells - 1.0));
            const double v = critical_ratio(sigma, frob, m, z, phi_s);
            vals.push_back(v);
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        CHECK(std::abs(best - (cells - 1) / 2) <= 1);
    }
    SUBCASE("peak over phi at fixed zeta_star sits at phi = 1") {
        int best = -1;
        double best_v = -1.0;
        const int cells = 41;
        for (int k = 0; k < cells; ++k) {
            const double f = std::pow(10.0, -1.0 + 2.0 * k / (cells - 1.0));
            const double v = critical_ratio(sigma, frob, m, zeta_s, f);
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        CHECK(std::abs(best - (cells - 1) / 2) <= 1);
    }
}

TEST_CASE("augment builds the expected block structure") {
    auto I = testutil::identity_csr(2);
    std::vector<double> b = {1.0, 1.0};
    auto aug = augment(I, b, 1.0, 1.0);
    REQUIRE(aug.a_tilde.rows() == 4);
    REQUIRE(aug.a_tilde.cols() == 4);
    CHECK(aug.a_tilde.is_normalized());
    CHECK(aug.zeta == 1.0);
    CHECK(aug.phi == 1.0);
    REQUIRE(aug.row_scales.size() == 4);

    // raw rows, recovered by undoing the per-row normalization:
    // (0,0,1,0), (0,0,0,1), (1,0,-1,0), (0,1,0,-1)
    const double want[4][4] = {{0, 0, 1, 0},
                               {0, 0, 0, 1},
                               {1, 0, -1, 0},
                               {0, 1, 0, -1}};
    auto D = to_dense(aug.a_tilde);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(D[i][j] * aug.row_scales[i] ==
                  doctest::Approx(want[i][j]).epsilon(1e-14));

    // b_tilde = (phi A^T b ; 0) scaled like the rows: (1, 1, 0, 0)
    CHECK(aug.b_tilde[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(aug.b_tilde[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(aug.b_tilde[2] == 0.0);
    CHECK(aug.b_tilde[3] == 0.0);

    // ||A_tilde||_F^2 before normalization = (1+phi^2) F + m zeta^2 = 6
    double frob = 0.0;
    for (double s : aug.row_scales) frob += s * s;
    CHECK(frob == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("augment rejects a matrix with an empty column") {
    std::vector<Triplet> t = {{0, 0, 1.0}, {1, 0, 1.0}};
    auto A = CsrMatrix::from_triplets(t, 2, 2);
    auto [N, nb] = normalize_rows(A, std::vector<double>{1.0, 1.0});
    check_error([&] { augment(N, nb, 0.5, 1.0); }, ErrorCode::ZeroColumn);
}

TEST_CASE("lsq_solve recovers the normal-equations solution") {
    auto inst = gen_sparse_gaussian({60, 30, 0.25, 101, false, 0.4});
    CHECK_FALSE(inst.x_star.has_value());
    LsqConfig cfg;
    cfg.max_epochs = 60000;
    cfg.target_r_sq = 1e-18;
    cfg.seed = 3;
    auto res = lsq_solve(inst.A, inst.b, cfg);

    auto oracle = dense_min_norm_lstsq(inst.A, inst.b);
    std::vector<double> diff(30);
    for (int j = 0; j < 30; ++j) diff[j] = res.x_ls[j] - oracle[j];
    CHECK(norm2(diff) <= 1e-6);
    CHECK(res.grad_norm <= 1e-6);

    SUBCASE("substitution identities of the augmented solution") {
        // x_hat = zeta * x_ls and y satisfy A x_hat = zeta y and
        // A^T y = A^T b up to the solve tolerance
        std::vector<double> xhat(30);
        for (int j = 0; j < 30; ++j) xhat[j] = res.zeta * res.x_ls[j];
        std::vector<double> ax;
        inst.A.multiply(xhat, ax);
        std::vector<double> gap(60);
        for (int i = 0; i < 60; ++i) gap[i] = ax[i] - res.zeta * res.y[i];
        CHECK(norm2(gap) <= 1e-5);

        std::vector<double> aty, atb;
        inst.A.multiply_transpose(res.y, aty);
        inst.A.multiply_transpose(inst.b, atb);
        std::vector<double> gap2(30);
        for (int j = 0; j < 30; ++j) gap2[j] = aty[j] - atb[j];
        CHECK(norm2(gap2) <= 1e-5);
    }
    SUBCASE("derived parameters are echoed") {
        CHECK(res.phi == 1.0);
        CHECK(res.sigma_r > 0.0);
        CHECK(res.zeta ==
              doctest::Approx(res.sigma_r / std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("a right-hand side orthogonal to the range maps to zero") {
    auto inst = gen_sparse_gaussian({12, 4, 0.5, 103, true, 0.0});
    // residual component of a generic vector is orthogonal to range(A)
    std::vector<double> w(12);
    for (int i = 0; i < 12; ++i) w[i] = std::cos(1.0 + i);
    auto xw = dense_min_norm_lstsq(inst.A, w);
    std::vector<double> aw;
    inst.A.multiply(xw, aw);
    std::vector<double> b_perp(12);
    for (int i = 0; i < 12; ++i) b_perp[i] = w[i] - aw[i];
    REQUIRE(norm2(b_perp) > 1e-6);

    LsqConfig cfg;
    cfg.max_epochs = 40000;
    cfg.target_r_sq = 1e-20;
    auto res = lsq_solve(inst.A, b_perp, cfg);
    CHECK(norm2(res.x_ls) <= 1e-6);
}

TEST_CASE("a consistent system is solved exactly") {
    auto inst = gen_sparse_gaussian({40, 16, 0.3, 107, true, 0.0});
    LsqConfig cfg;
    cfg.max_epochs = 40000;
    cfg.target_r_sq = 1e-20;
    auto res = lsq_solve(inst.A, inst.b, cfg);
    std::vector<double> diff(16);
    for (int j = 0; j < 16; ++j) diff[j] = res.x_ls[j] - (*inst.x_star)[j];
    CHECK(norm2(diff) <= 1e-6);
}

TEST_CASE("explicit parameters override the derived ones") {
    auto inst = gen_sparse_gaussian({30, 12, 0.3, 109, false, 0.3});
    LsqConfig cfg;
    cfg.zeta = 0.37;
    cfg.phi = 1.5;
    cfg.max_epochs = 10;
    auto res = lsq_solve(inst.A, inst.b, cfg);
    CHECK(res.zeta == 0.37);
    CHECK(res.phi == 1.5);
}

TEST_CASE("above the dense cap sigma_r must be supplied") {
    // two shifted diagonals: every row and every column are populated,
    // and 2500*1700 cells exceed the dense-SVD cap
    const index_t m = 2500, n = 1700;
    std::vector<Triplet> t;
    for (index_t i = 0; i < m; ++i) {
        t.push_back({i, i % n, 1.0});
        t.push_back({i, (i + 7) % n, 0.5});
    }
    auto A0 = CsrMatrix::from_triplets(t, m, n);
    std::vector<double> ones(static_cast<std::size_t>(m), 1.0);
    auto [A, b] = normalize_rows(A0, ones);

    LsqConfig cfg;
    cfg.max_epochs = 1;
    check_error([&] { lsq_solve(A, b, cfg); }, ErrorCode::SigmaUnavailable);
    cfg.sigma_r = 0.5;
    auto res = lsq_solve(A, b, cfg);
    CHECK(res.sigma_r == 0.5);
}

#include "helpers.hpp"

#include <cstdio>
#include <filesystem>
#include <string>
#include <unistd.h>

#include <asyrk/dense.hpp>
#include <asyrk/io.hpp>
#include <asyrk/trace.hpp>

using namespace asyrk;
using testutil::check_error;
using testutil::same_bits;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("asyrk_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("gen_sparse_gaussian dense 2x2 instance") {
    auto inst = gen_sparse_gaussian({2, 2, 1.0, 5, true, 0.0});
    CHECK(inst.A.rows() == 2);
    CHECK(inst.A.cols() == 2);
    CHECK(inst.A.nnz() == 4);
    CHECK(inst.A.is_normalized());
    REQUIRE(inst.x_star.has_value());
    CHECK(residuals(inst.A, *inst.x_star, inst.b).r_sq <= 1e-18);
    CHECK(inst.spec.m == 2);
    CHECK(inst.spec.seed == 5);
}

TEST_CASE("nonzero count is round(delta m n)") {
    auto inst = gen_sparse_gaussian({30, 20, 0.173, 9, true, 0.0});
    CHECK(inst.A.nnz() == 104);
}

TEST_CASE("sparse structure repair leaves no empty row") {
    // 50 cells across 50 rows forces the repair path with high probability
    auto inst = gen_sparse_gaussian({50, 50, 0.02, 13, true, 0.0});
    CHECK(inst.A.nnz() == 50);
    for (index_t i = 0; i < 50; ++i) CHECK(inst.A.row_nnz(i) >= 1);
}

TEST_CASE("generation is bit-deterministic per seed") {
    GenSpec spec{40, 25, 0.15, 21, true, 0.0};
    auto a = gen_sparse_gaussian(spec);
    auto b = gen_sparse_gaussian(spec);
    CHECK(a.A.col_idx() == b.A.col_idx());
    CHECK(same_bits(a.A.values(), b.A.values()));
    CHECK(same_bits(a.b, b.b));
    CHECK(same_bits(*a.x_star, *b.x_star));

    spec.seed = 22;
    auto c = gen_sparse_gaussian(spec);
    CHECK_FALSE(same_bits(a.A.values(), c.A.values()));
}

TEST_CASE("infeasible or invalid generator specs are rejected") {
    check_error([] { gen_sparse_gaussian({10, 10, 0.05, 1, true, 0.0}); },
                ErrorCode::InfeasibleSpec);  // 5 cells cannot fill 10 rows
    check_error([] { gen_sparse_gaussian({20, 30, 0.5, 1, false, 0.1}); },
                ErrorCode::InfeasibleSpec);  // inconsistent needs m > n
    check_error([] { gen_sparse_gaussian({10, 10, 0.0, 1, true, 0.0}); },
                ErrorCode::InvalidArgument);
    check_error([] { gen_sparse_gaussian({10, 10, 1.5, 1, true, 0.0}); },
                ErrorCode::InvalidArgument);
    check_error([] { gen_sparse_gaussian({0, 10, 0.5, 1, true, 0.0}); },
                ErrorCode::InvalidArgument);
}

TEST_CASE("inconsistent instances leave the range of A") {
    auto inst = gen_sparse_gaussian({40, 10, 0.5, 33, false, 0.3});
    CHECK_FALSE(inst.x_star.has_value());
    auto x_ls = dense_min_norm_lstsq(inst.A, inst.b);
    auto r = residuals(inst.A, x_ls, inst.b);
    CHECK(r.r_sq > 1e-6);            // genuinely inconsistent
    CHECK(r.grad_sq <= 1e-18 * 40);  // but x_ls is the least-squares point
}

TEST_CASE("matrix market round trip is bit exact") {
    TempDir tmp;
    auto inst = gen_sparse_gaussian({35, 18, 0.2, 41, true, 0.0});
    const std::string path = tmp.str() + "/A.mtx";
    write_matrix_market(path, inst.A);
    auto back = read_matrix_market(path);
    CHECK(back.rows() == 35);
    CHECK(back.cols() == 18);
    CHECK(back.col_idx() == inst.A.col_idx());
    CHECK(same_bits(back.values(), inst.A.values()));

    SUBCASE("awkward values survive") {
        std::vector<Triplet> t = {{0, 0, 1.0 / 3.0},
                                  {0, 1, -2.5e-13},
                                  {1, 0, 1e17},
                                  {1, 1, -7.000000000000001}};
        auto M = CsrMatrix::from_triplets(t, 2, 2);
        const std::string p2 = tmp.str() + "/M.mtx";
        write_matrix_market(p2, M);
        auto rt = read_matrix_market(p2);
        CHECK(same_bits(rt.values(), M.values()));
    }
}

TEST_CASE("matrix market reader rejects malformed files") {
    TempDir tmp;
    const std::string p = tmp.str() + "/bad.mtx";
    check_error([&] { read_matrix_market(tmp.str() + "/missing.mtx"); },
                ErrorCode::IoError);

    write_text(p, "%%NotMatrixMarket\n2 2 1\n1 1 1.0\n");
    check_error([&] { read_matrix_market(p); }, ErrorCode::IoError);

    write_text(p,
               "%%MatrixMarket matrix coordinate real general\n2 2 2\n"
               "0 1 1.0\n1 1 1.0\n");  // 1-based indices required
    check_error([&] { read_matrix_market(p); }, ErrorCode::IoError);

    write_text(p,
               "%%MatrixMarket matrix coordinate real general\n2 2 3\n"
               "1 1 1.0\n2 2 1.0\n");  // fewer entries than declared
    check_error([&] { read_matrix_market(p); }, ErrorCode::IoError);
}

TEST_CASE("vector files round trip bit exactly") {
    TempDir tmp;
    std::vector<double> v = {0.1, -3.0, 1e-17, 123456789.123456789, -0.0};
    const std::string p = tmp.str() + "/v.txt";
    write_vector(p, v);
    auto back = read_vector(p);
    CHECK(same_bits(back, v));
    check_error([&] { read_vector(tmp.str() + "/nope.txt"); },
                ErrorCode::IoError);
}

TEST_CASE("instance directories round trip") {
    TempDir tmp;

    SUBCASE("consistent instance") {
        auto inst = gen_sparse_gaussian({25, 10, 0.3, 51, true, 0.0});
        write_instance(tmp.str(), inst);
        auto back = read_instance(tmp.str());
        CHECK(back.A.is_normalized());
        CHECK(back.A.col_idx() == inst.A.col_idx());
        CHECK(same_bits(back.A.values(), inst.A.values()));
        CHECK(same_bits(back.b, inst.b));
        REQUIRE(back.x_star.has_value());
        CHECK(same_bits(*back.x_star, *inst.x_star));
        CHECK(back.spec.m == 25);
        CHECK(back.spec.delta == inst.spec.delta);
        CHECK(back.spec.seed == 51);
    }
    SUBCASE("inconsistent instance omits the planted solution") {
        auto inst = gen_sparse_gaussian({25, 10, 0.3, 53, false, 0.2});
        write_instance(tmp.str(), inst);
        auto back = read_instance(tmp.str());
        CHECK_FALSE(back.x_star.has_value());
        CHECK(back.spec.consistent == false);
        CHECK(back.spec.noise_level == inst.spec.noise_level);
    }
    SUBCASE("corrupted pieces are reported as IoError") {
        auto inst = gen_sparse_gaussian({25, 10, 0.3, 51, true, 0.0});
        write_instance(tmp.str(), inst);
        auto btxt = read_text(tmp.str() + "/b.txt");
        write_text(tmp.str() + "/b.txt", btxt + "1.5\n");
        check_error([&] { read_instance(tmp.str()); }, ErrorCode::IoError);
    }
}

TEST_CASE("trace serialization") {
    Trace tr;
    tr.config_echo = R"({"solver":"rk","seed":7})";
    EpochRecord r0;
    r0.epoch_index = 0;
    r0.r_sq = 4.0;
    r0.grad_sq = 2.0;
    r0.updates_applied = 0;
    EpochRecord r1;
    r1.epoch_index = 1;
    r1.r_sq = 2.0;
    r1.grad_sq = 1.0;
    r1.dist_sq = 0.5;
    r1.wall_seconds = 0.125;
    r1.updates_applied = 30;
    tr.epochs = {r0, r1};
    tr.final_x = {1.5, -2.25};
    tr.validate();

    SUBCASE("jsonl round trip") {
        auto rt = Trace::from_jsonl(tr.to_jsonl());
        REQUIRE(rt.epochs.size() == 2);
        CHECK(rt.epochs[0].r_sq == 4.0);
        CHECK_FALSE(rt.epochs[0].dist_sq.has_value());
        REQUIRE(rt.epochs[1].dist_sq.has_value());
        CHECK(*rt.epochs[1].dist_sq == 0.5);
        CHECK(rt.epochs[1].wall_seconds == 0.125);
        CHECK(rt.epochs[1].updates_applied == 30);
        CHECK(same_bits(rt.final_x, tr.final_x));
        CHECK(rt.config_echo.find("\"solver\"") != std::string::npos);
    }
    SUBCASE("csv header and empty dist cell") {
        auto csv = tr.to_csv();
        CHECK(csv.rfind("epoch_index,r_sq,grad_sq,dist_sq,wall_seconds,"
                        "updates_applied\n",
                        0) == 0);
        // record 0 has no dist_sq: two consecutive commas in its row
        auto line1 = csv.substr(csv.find('\n') + 1);
        line1 = line1.substr(0, line1.find('\n'));
        CHECK(line1.find(",,") != std::string::npos);
    }
    SUBCASE("validate rejects broken records") {
        Trace bad = tr;
        bad.epochs[1].epoch_index = 0;  // not increasing
        check_error([&] { bad.validate(); }, ErrorCode::InvalidArgument);
        Trace neg = tr;
        neg.epochs[0].r_sq = -1.0;
        check_error([&] { neg.validate(); }, ErrorCode::InvalidArgument);
    }
    SUBCASE("from_jsonl rejects garbage") {
        check_error([] { Trace::from_jsonl("not json\n"); },
                    ErrorCode::IoError);
    }
}

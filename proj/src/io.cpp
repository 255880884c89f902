#include "asyrk/io.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asyrk/error.hpp"
#include <json.hpp>

namespace asyrk {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
    fail(ErrorCode::IoError, path + ": " + what);
}

std::FILE* open_or_fail(const std::string& path, const char* mode) {
    std::FILE* f = std::fopen(path.c_str(), mode);
    if (!f) io_fail(path, std::strerror(errno));
    return f;
}

struct FileCloser {
    std::FILE* f;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

void flush_or_fail(std::FILE* f, const std::string& path) {
    if (std::fflush(f) != 0) io_fail(path, "write failed");
}

} // namespace

void write_matrix_market(const std::string& path, const CsrMatrix& A) {
    std::FILE* f = open_or_fail(path, "w");
    FileCloser closer{f};
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%" PRId64 " %" PRId64 " %" PRId64 "\n", A.rows(), A.cols(), A.nnz());
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& va = A.values();
    for (index_t i = 0; i < A.rows(); ++i) {
        for (index_t p = rp[static_cast<std::size_t>(i)];
             p < rp[static_cast<std::size_t>(i) + 1]; ++p) {
            std::fprintf(f, "%" PRId64 " %" PRId64 " %.17g\n", i + 1,
                         ci[static_cast<std::size_t>(p)] + 1,
                         va[static_cast<std::size_t>(p)]);
        }
    }
    flush_or_fail(f, path);
}

CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_fail(path, "cannot open");
    std::string line;
    if (!std::getline(in, line)) io_fail(path, "empty file");
    if (line.rfind("%%MatrixMarket", 0) != 0)
        io_fail(path, "missing MatrixMarket banner");
    {
        std::istringstream hdr(line);
        std::string tag, object, format, field, symmetry;
        hdr >> tag >> object >> format >> field >> symmetry;
        if (object != "matrix" || format != "coordinate" || field != "real" ||
            symmetry != "general")
            io_fail(path, "unsupported MatrixMarket type: " + line);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    index_t m = 0, n = 0, nnz = 0;
    {
        std::istringstream sz(line);
        if (!(sz >> m >> n >> nnz)) io_fail(path, "bad size line");
    }
    if (m < 1 || n < 1 || nnz < 0) io_fail(path, "bad dimensions");
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nnz));
    for (index_t k = 0; k < nnz; ++k) {
        index_t i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) io_fail(path, "truncated entry list");
        if (i < 1 || i > m || j < 1 || j > n)
            io_fail(path, "entry index out of range");
        trips.push_back({i - 1, j - 1, v});
    }
    return CsrMatrix::from_triplets(trips, m, n);
}

void write_vector(const std::string& path, std::span<const double> v) {
    std::FILE* f = open_or_fail(path, "w");
    FileCloser closer{f};
    for (double x : v) std::fprintf(f, "%.17g\n", x);
    flush_or_fail(f, path);
}

std::vector<double> read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_fail(path, "cannot open");
    std::vector<double> v;
    double x = 0.0;
    while (in >> x) v.push_back(x);
    if (!in.eof()) io_fail(path, "non-numeric content");
    return v;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail(path, "cannot open");
    out << text;
    if (!out) io_fail(path, "write failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_instance(const std::string& dir, const Instance& inst) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) io_fail(dir, ec.message());
    write_matrix_market(dir + "/A.mtx", inst.A);
    write_vector(dir + "/b.txt", inst.b);
    if (inst.x_star) write_vector(dir + "/xstar.txt", *inst.x_star);
    nlohmann::json meta = {
        {"schema", 1},
        {"m", inst.spec.m},
        {"n", inst.spec.n},
        {"delta", inst.spec.delta},
        {"seed", inst.spec.seed},
        {"consistent", inst.spec.consistent},
        {"noise_level", inst.spec.noise_level},
        {"nnz", inst.A.nnz()},
        {"normalized", inst.A.is_normalized()},
        {"has_x_star", inst.x_star.has_value()},
    };
    write_text(dir + "/meta.json", meta.dump(2) + "\n");
}

Instance read_instance(const std::string& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text(dir + "/meta.json"));
    } catch (const nlohmann::json::exception& e) {
        io_fail(dir + "/meta.json", e.what());
    }
    Instance inst;
    try {
        inst.spec.m = meta.at("m").get<index_t>();
        inst.spec.n = meta.at("n").get<index_t>();
        inst.spec.delta = meta.at("delta").get<double>();
        inst.spec.seed = meta.at("seed").get<std::uint64_t>();
        inst.spec.consistent = meta.at("consistent").get<bool>();
        inst.spec.noise_level = meta.at("noise_level").get<double>();
    } catch (const nlohmann::json::exception& e) {
        io_fail(dir + "/meta.json", e.what());
    }
    inst.A = read_matrix_market(dir + "/A.mtx");
    inst.b = read_vector(dir + "/b.txt");
    if (inst.A.rows() != static_cast<index_t>(inst.b.size()))
        io_fail(dir, "A and b dimensions disagree");
    if (inst.A.rows() != inst.spec.m || inst.A.cols() != inst.spec.n)
        io_fail(dir, "matrix dimensions disagree with metadata");
    if (meta.value("normalized", false)) inst.A.flag_normalized();
    if (meta.value("has_x_star", false)) {
        auto xs = read_vector(dir + "/xstar.txt");
        if (static_cast<index_t>(xs.size()) != inst.A.cols())
            io_fail(dir + "/xstar.txt", "wrong length");
        inst.x_star = std::move(xs);
    }
    return inst;
}

} // namespace asyrk

#include "asyrk/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "asyrk/dense.hpp"
#include "asyrk/error.hpp"
#include "asyrk/rng.hpp"

namespace asyrk {

Instance gen_sparse_gaussian(const GenSpec& spec) {
    if (spec.m < 1 || spec.n < 1) {
        fail(ErrorCode::InvalidArgument, "m and n must be >= 1");
    }
    if (!(spec.delta > 0.0 && spec.delta <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "delta must lie in (0, 1]");
    }
    const index_t m = spec.m;
    const index_t n = spec.n;
    const index_t total = m * n;
    const index_t nnz = static_cast<index_t>(
        std::llround(spec.delta * static_cast<double>(m) *
                     static_cast<double>(n)));
    if (nnz < m) {
        fail(ErrorCode::InfeasibleSpec,
             "round(delta*m*n) = " + std::to_string(nnz) +
                 " cells cannot cover " + std::to_string(m) + " rows");
    }
    if (!spec.consistent && m <= n) {
        fail(ErrorCode::InfeasibleSpec,
             "inconsistent b needs m > n (otherwise range(A) can fill the "
             "whole space)");
    }

    auto gen = make_stream(spec.seed, 0);

    // Floyd's uniform sampling of nnz distinct cells from the m*n grid.
    std::unordered_set<index_t> chosen;
    chosen.reserve(static_cast<std::size_t>(nnz) * 2);
    std::vector<index_t> cells;
    cells.reserve(static_cast<std::size_t>(nnz));
    for (index_t j = total - nnz; j < total; ++j) {
        const index_t r = static_cast<index_t>(
            uniform_below(gen, static_cast<std::uint64_t>(j) + 1));
        const index_t pick = chosen.count(r) ? j : r;
        chosen.insert(pick);
        cells.push_back(pick);
    }

    std::vector<index_t> row_count(static_cast<std::size_t>(m), 0);
    for (index_t c : cells) ++row_count[static_cast<std::size_t>(c / n)];

    // Repair: move one cell from the fullest row into each empty row at a
    // random free column, keeping the total cell count exact.
    for (index_t i = 0; i < m; ++i) {
        if (row_count[static_cast<std::size_t>(i)] > 0) continue;
        index_t donor = 0;
        for (index_t r = 1; r < m; ++r) {
            if (row_count[static_cast<std::size_t>(r)] >
                row_count[static_cast<std::size_t>(donor)]) {
                donor = r;
            }
        }
        // candidate positions of the donor row, ascending
        std::vector<std::size_t> donor_cells;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (cells[k] / n == donor) donor_cells.push_back(k);
        }
        const std::size_t victim = donor_cells[static_cast<std::size_t>(
            uniform_below(gen, donor_cells.size()))];
        chosen.erase(cells[victim]);
        index_t replacement;
        do {
            replacement = i * n + static_cast<index_t>(uniform_below(
                                      gen, static_cast<std::uint64_t>(n)));
        } while (chosen.count(replacement));
        chosen.insert(replacement);
        cells[victim] = replacement;
        --row_count[static_cast<std::size_t>(donor)];
        ++row_count[static_cast<std::size_t>(i)];
    }

    std::sort(cells.begin(), cells.end());
    std::vector<Triplet> trip(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        trip[k] = {cells[k] / n, cells[k] % n, standard_normal(gen)};
    }
    CsrMatrix raw = CsrMatrix::from_triplets(trip, m, n);
    std::vector<double> zero_b(static_cast<std::size_t>(m), 0.0);
    auto [A, ignored_b] = normalize_rows(raw, zero_b);

    Instance inst;
    inst.spec = spec;

    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& v : xs) v = standard_normal(gen);
    A.multiply(xs, inst.b);

    if (spec.consistent) {
        inst.x_star = std::move(xs);
    } else {
        // Draw w until a tenth of its norm lies outside range(A); the dense
        // least-squares fit supplies the in-range part.
        std::vector<double> w(static_cast<std::size_t>(m));
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            double wn = 0.0;
            for (auto& v : w) {
                v = standard_normal(gen);
                wn += v * v;
            }
            const std::vector<double> z = dense_min_norm_lstsq(A, w);
            std::vector<double> az;
            A.multiply(z, az);
            double perp = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double d = w[i] - az[i];
                perp += d * d;
            }
            ok = perp >= 0.01 * wn;  // ||w_perp|| >= 0.1 ||w||
        }
        if (!ok) {
            fail(ErrorCode::InfeasibleSpec,
                 "could not draw a direction leaving range(A)");
        }
        double wn = 0.0;
        for (double v : w) wn += v * v;
        wn = std::sqrt(wn);
        for (std::size_t i = 0; i < w.size(); ++i) {
            inst.b[i] += spec.noise_level * w[i] / wn;
        }
    }
    inst.A = std::move(A);
    return inst;
}

} // namespace asyrk

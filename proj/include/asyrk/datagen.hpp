#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "asyrk/csr.hpp"

namespace asyrk {

struct GenSpec {
    index_t m = 0;
    index_t n = 0;
    double delta = 0.0;        // target nonzero fraction, round(delta*m*n) cells
    std::uint64_t seed = 0;
    bool consistent = true;
    double noise_level = 0.0;  // magnitude of the residual added when inconsistent
};

struct Instance {
    CsrMatrix A;  // rows normalized
    std::vector<double> b;
    std::optional<std::vector<double>> x_star;  // present only when consistent
    GenSpec spec;
};

/// Sparse Gaussian instance: exactly round(delta*m*n) cells placed uniformly
/// without replacement, values N(0,1), zero rows repaired by moving one cell
/// from the fullest row (total count preserved), rows normalized. Consistent:
/// b = A x* with dense x* ~ N(0,1)^n. Inconsistent: b = A x* + noise_level*w
/// with unit w drawn so at least 10% of its norm lies outside range(A)
/// (requires m > n). Same seed, same files, bit for bit.
Instance gen_sparse_gaussian(const GenSpec& spec);

} // namespace asyrk

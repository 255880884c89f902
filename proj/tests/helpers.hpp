#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <doctest.h>

#include <asyrk/csr.hpp>
#include <asyrk/datagen.hpp>
#include <asyrk/error.hpp>

namespace testutil {

inline asyrk::CsrMatrix identity_csr(asyrk::index_t n) {
    std::vector<asyrk::Triplet> t;
    for (asyrk::index_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    auto A = asyrk::CsrMatrix::from_triplets(t, n, n);
    A.flag_normalized();
    return A;
}

// rows e1, e2, (sqrt(.5), sqrt(.5)); all unit norm
inline asyrk::CsrMatrix three_row_example() {
    const double s = std::sqrt(0.5);
    std::vector<asyrk::Triplet> t = {
        {0, 0, 1.0}, {1, 1, 1.0}, {2, 0, s}, {2, 1, s}};
    auto A = asyrk::CsrMatrix::from_triplets(t, 3, 2);
    A.flag_normalized();
    return A;
}

// asserts that fn throws asyrk::Error with the given code
inline void check_error(const std::function<void()>& fn,
                        asyrk::ErrorCode want) {
    bool caught = false;
    try {
        fn();
    } catch (const asyrk::Error& e) {
        caught = true;
        CHECK(e.code() == want);
    }
    CHECK_MESSAGE(caught, "expected an asyrk::Error, none was thrown");
}

inline bool same_bits(const std::vector<double>& a,
                      const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace testutil

#pragma once

// Test-only reference computations. Nothing here calls into the library's
// spectral or product code, so these stay independent of what they check.

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using IntMatrix = std::vector<std::vector<long long>>;

inline IntMatrix random_int_matrix(int k, int lo, int hi, std::mt19937_64& gen) {
    std::uniform_int_distribution<int> d(lo, hi);
    IntMatrix m(k, std::vector<long long>(k));
    for (auto& row : m)
        for (auto& x : row) x = d(gen);
    return m;
}

/// Rank by fraction-exact Gaussian elimination over Q.
inline int exact_rank(const std::vector<std::vector<mpz_class>>& in) {
    const int rows = static_cast<int>(in.size());
    const int cols = rows ? static_cast<int>(in[0].size()) : 0;
    std::vector<std::vector<mpq_class>> a(rows, std::vector<mpq_class>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) a[r][c] = in[r][c];
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (sgn(a[r][c]) != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[pivot], a[rank]);
        for (int r = rank + 1; r < rows; ++r) {
            const mpq_class f = a[r][c] / a[rank][c];
            for (int j = c; j < cols; ++j) a[r][j] -= f * a[rank][j];
        }
        ++rank;
    }
    return rank;
}

inline int exact_rank(const IntMatrix& m) {
    std::vector<std::vector<mpz_class>> z(m.size());
    for (std::size_t r = 0; r < m.size(); ++r)
        for (long long x : m[r]) z[r].emplace_back(static_cast<long>(x));
    return exact_rank(z);
}

inline IntMatrix int_multiply(const IntMatrix& a, const IntMatrix& b) {
    const std::size_t k = a.size();
    IntMatrix out(k, std::vector<long long>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < k; ++j) out[i][j] += a[i][l] * b[l][j];
    return out;
}

/// Sign of (a+d)^2 - 4(ad-bc) in 64-bit integers (entries small).
inline int int_discriminant_sign(long long a, long long b, long long c, long long d) {
    const long long disc = (a + d) * (a + d) - 4 * (a * d - b * c);
    return (disc > 0) - (disc < 0);
}

} // namespace oracle

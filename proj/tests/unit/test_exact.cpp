#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rmprod/error.hpp"
#include "rmprod/exact.hpp"

using namespace rmprod;

TEST_CASE("exact_product") {
    SUBCASE("2^64 does not overflow") {
        const std::vector<ExactMatrix> f(64, ExactMatrix(2, {2, 0, 0, 2}));
        const ExactMatrix p = exact_product(f);
        mpz_class two64;
        mpz_ui_pow_ui(two64.get_mpz_t(), 2, 64);
        CHECK(p == ExactMatrix(2, {two64, 0, 0, two64}));
        CHECK(p(0, 0).get_str() == "18446744073709551616");
    }
    SUBCASE("single factor returned unchanged") {
        const ExactMatrix m(3, {1, -2, 3, 4, 5, -6, 7, 8, 9});
        CHECK(exact_product(std::vector{m}) == m);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(exact_product(std::vector<ExactMatrix>{}), DimensionError);
        CHECK_THROWS_AS(multiply(ExactMatrix(2), ExactMatrix(3)), DimensionError);
    }
    SUBCASE("agrees with the rescaled float product for short +-1/0 products") {
        std::mt19937_64 gen(2024);
        std::uniform_int_distribution<int> entry(-1, 1);
        for (int k = 1; k <= 4; ++k)
            for (int n = 1; n <= 20; ++n)
                for (int rep = 0; rep < 5; ++rep) {
                    std::vector<ExactMatrix> ef;
                    std::vector<SquareMatrix> ff;
                    for (int i = 0; i < n; ++i) {
                        SquareMatrix m(k);
                        for (int r = 0; r < k; ++r)
                            for (int c = 0; c < k; ++c) m(r, c) = entry(gen);
                        ff.push_back(m);
                        ef.push_back(to_exact(m));
                    }
                    const ExactMatrix exact = exact_product(ef);
                    const ScaledMatrix scaled = product_rescaled(ff);
                    if (exact.is_zero()) {
                        // float may cancel to zero or leave rounding debris
                        CHECK((scaled.is_zero || scaled.min_step_ratio < 1e-6));
                        continue;
                    }
                    REQUIRE_FALSE(scaled.is_zero);
                    const SquareMatrix rec = scaled.reconstruct();
                    double diff2 = 0.0, norm2 = 0.0;
                    for (int r = 0; r < k; ++r)
                        for (int c = 0; c < k; ++c) {
                            const double e = exact(r, c).get_d();
                            diff2 += (rec(r, c) - e) * (rec(r, c) - e);
                            norm2 += e * e;
                        }
                    CHECK(std::sqrt(diff2 / norm2) <= 1e-9);
                }
    }
}

TEST_CASE("rank_le_one (exact)") {
    CHECK(rank_le_one(ExactMatrix(3, {4, 5, 6, 8, 10, 12, 12, 15, 18})));
    CHECK_FALSE(rank_le_one(ExactMatrix::identity(2)));
    CHECK(rank_le_one(ExactMatrix(3, {7, 7, 7, 7, 7, 7, 7, 7, 7})));
    CHECK(rank_le_one(ExactMatrix(2)));

    SUBCASE("matches the elimination rank oracle") {
        std::mt19937_64 gen(5);
        for (int trial = 0; trial < 400; ++trial) {
            const int k = 2 + trial % 3;
            const auto m = oracle::random_int_matrix(k, -1, 1, gen);
            std::vector<mpz_class> e;
            for (const auto& row : m)
                for (long long x : row) e.emplace_back(static_cast<long>(x));
            CHECK(rank_le_one(ExactMatrix(k, e)) == (oracle::exact_rank(m) <= 1));
        }
    }
    SUBCASE("monotone under products") {
        std::mt19937_64 gen(9);
        for (int trial = 0; trial < 300; ++trial) {
            const int k = 2 + trial % 3;
            std::vector<ExactMatrix> f;
            const int n = 1 + trial % 6;
            const int rank_one_at = trial % n;
            for (int i = 0; i < n; ++i) {
                const auto m = oracle::random_int_matrix(k, -3, 3, gen);
                std::vector<mpz_class> e;
                for (int r = 0; r < k; ++r)
                    for (int c = 0; c < k; ++c)
                        e.emplace_back(i == rank_one_at ? static_cast<long>(m[r][0] * m[0][c])
                                                        : static_cast<long>(m[r][c]));
                f.emplace_back(k, e);
            }
            REQUIRE(rank_le_one(f[rank_one_at]));
            CHECK(rank_le_one(exact_product(f)));
        }
    }
}

TEST_CASE("conversions") {
    CHECK_THROWS_AS(to_exact(SquareMatrix(2, {1, 0.5, 0, 1})), DomainError);
    CHECK(to_exact(SquareMatrix(2, {1, -3, 0, 1e15})) == ExactMatrix(2, {1, -3, 0, 1000000000000000L}));

    // Entries around 2^3000 are far beyond double range.
    mpz_class big;
    mpz_ui_pow_ui(big.get_mpz_t(), 2, 3000);
    const ScaledMatrix s = to_scaled(ExactMatrix(2, {big, 0, 0, big}));
    CHECK_FALSE(s.is_zero);
    CHECK(s.matrix(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.log_scale == doctest::Approx(3000 * std::log(2.0) + 0.5 * std::log(2.0)));
    CHECK(to_scaled(ExactMatrix(3)).is_zero);
}

TEST_CASE("to_exact_dyadic") {
    CHECK(to_exact_dyadic(SquareMatrix(2, {0.5, 0.25, -3, 0})) == ExactMatrix(2, {2, 1, -12, 0}));
    CHECK(to_exact_dyadic(SquareMatrix(2, {1, -3, 0, 1e15})) == to_exact(SquareMatrix(2, {1, -3, 0, 1e15})));
    CHECK(to_exact_dyadic(SquareMatrix(3)).is_zero());
    CHECK_THROWS_AS(to_exact_dyadic(SquareMatrix(1, {std::nan("")})), NumericalError);

    SUBCASE("one common power-of-two factor, even across wide exponent ranges") {
        std::mt19937_64 gen(71);
        std::normal_distribution<double> nd;
        std::uniform_int_distribution<int> ed(-300, 300);
        for (int t = 0; t < 500; ++t) {
            SquareMatrix m(3);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) m(r, c) = std::ldexp(nd(gen), ed(gen));
            const ExactMatrix e = to_exact_dyadic(m);
            const mpq_class ratio = mpq_class(e(0, 0)) / mpq_class(m(0, 0));
            CHECK(ratio.get_den() == 1);
            CHECK(mpz_popcount(ratio.get_num_mpz_t()) == 1);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) CHECK(mpq_class(e(r, c)) == ratio * mpq_class(m(r, c)));
        }
    }
}

TEST_CASE("rational parsing") {
    CHECK(parse_rational("3/4") == mpq_class(3, 4));
    CHECK(parse_rational("-6/8") == mpq_class(-3, 4));
    CHECK(parse_rational("0.25") == mpq_class(1, 4));
    CHECK(parse_rational("-1.5e-3") == mpq_class(-3, 2000));
    CHECK(parse_rational("2E2") == mpq_class(200));
    CHECK(parse_rational(" 7 ") == mpq_class(7));
    CHECK(parse_rational("0.1") == mpq_class(1, 10));
    for (const char* bad : {"", "a", "1/0", "1/-2", "1..2", "3/", "1e", "--1", "0x10"})
        CHECK_THROWS_AS(parse_rational(bad), DomainError);
    CHECK(to_string(mpq_class(6, 8)) == "3/4");
    CHECK(to_string(mpq_class(-4, 2)) == "-2");
}

#include <cmath>

#include "doctest.h"
#include "rmprod/measures.hpp"
#include "rmprod/montecarlo.hpp"
#include "rmprod/spectra.hpp"

using namespace rmprod;

TEST_CASE("entry measure validation") {
    CHECK_THROWS_AS(EntryMeasure::atomic({{1, mpq_class(1, 2)}, {2, mpq_class(1, 4)}}), MassError);
    CHECK_THROWS_AS(EntryMeasure::atomic({{1, mpq_class(1, 2)}}, Gaussian{}, mpq_class(1, 4)), MassError);
    CHECK_THROWS_AS(EntryMeasure::atomic({{1, mpq_class(0)}, {2, mpq_class(1)}}), MassError);
    CHECK_THROWS_AS(EntryMeasure::atomic({{1, mpq_class(1, 2)}}, std::nullopt, mpq_class(1, 2)), MassError);
    CHECK_THROWS_AS(EntryMeasure::atomic({{1, mpq_class(1, 2)}, {1, mpq_class(1, 2)}}), DomainError);
    CHECK_THROWS_AS(EntryMeasure::uniform(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(EntryMeasure::gaussian(0.0, -1.0), DomainError);
    CHECK_NOTHROW(EntryMeasure::atomic({{0, mpq_class(1, 4)}, {1, mpq_class(1, 4)}}, Gaussian{}, mpq_class(1, 2)));

    CHECK(EntryMeasure::rademacher() ==
          EntryMeasure::atomic({{1, mpq_class(1, 2)}, {-1, mpq_class(1, 2)}}));
    CHECK(EntryMeasure::rademacher().is_integer_valued());
    CHECK_FALSE(EntryMeasure::atomic({{0.5, mpq_class(1)}}).is_integer_valued());
    CHECK_FALSE(EntryMeasure::gaussian().is_integer_valued());

    CHECK_THROWS_AS(MatrixMeasure::iid(EntryMeasure::gaussian(), 9), DimensionError);
    CHECK_THROWS_AS(MatrixMeasure::rank_one_mixture(0, EntryMeasure::gaussian(), 2), MassError);
    CHECK_THROWS_AS(MatrixMeasure::finite_support({{SquareMatrix(2), mpq_class(1, 2)}}), MassError);
    CHECK_THROWS_AS(MatrixMeasure::finite_support({{SquareMatrix(2), mpq_class(1, 2)},
                                                   {SquareMatrix(3), mpq_class(1, 2)}}),
                    DimensionError);
}

TEST_CASE("sample_matrix") {
    SUBCASE("degenerate finite support always returns its matrix") {
        const SquareMatrix m(2, {1, 2, 3, 4});
        const auto law = MatrixMeasure::finite_support({{m, mpq_class(1)}});
        CounterStream rng(3, 0);
        for (int i = 0; i < 100; ++i) CHECK(sample_matrix(law, rng) == m);
    }
    SUBCASE("Rademacher entries are +-1 and balanced") {
        const auto law = MatrixMeasure::iid(EntryMeasure::rademacher(), 3);
        CounterStream rng(4, 0);
        long plus = 0, total = 0;
        for (int i = 0; i < 10000; ++i)
            for (double x : sample_matrix(law, rng).entries()) {
                REQUIRE((x == 1.0 || x == -1.0));
                plus += x > 0;
                ++total;
            }
        CHECK(std::abs(static_cast<double>(plus) / total - 0.5) < 5 * 0.5 / std::sqrt(total));
    }
    SUBCASE("Gaussian entry mean within 5 sigma over 1e5 draws") {
        const auto law = MatrixMeasure::iid(EntryMeasure::gaussian(), 1);
        CounterStream rng(5, 0);
        double sum = 0;
        for (int i = 0; i < 100000; ++i) sum += sample_matrix(law, rng)(0, 0);
        CHECK(std::abs(sum / 100000) <= 0.02);
    }
    SUBCASE("identical streams give identical draws") {
        const auto law = MatrixMeasure::iid(
            EntryMeasure::atomic({{0, mpq_class(1, 4)}, {3, mpq_class(1, 4)}}, Uniform{-2, 2}, mpq_class(1, 2)), 4);
        for (std::uint64_t id = 0; id < 50; ++id) {
            CounterStream a(99, id), b(99, id);
            CHECK(sample_matrix(law, a) == sample_matrix(law, b));
        }
    }
    SUBCASE("rank-one mixture hits rank <= 1 with frequency p1") {
        const auto law = MatrixMeasure::rank_one_mixture(mpq_class(3, 10), EntryMeasure::gaussian(), 3);
        const auto tally = estimate_rank_le_one(law, 20000, 1, kDefaultRankTol, 1);
        const auto [lo, hi] = wilson_interval(tally.rank_le_one, tally.trials, 0.999);
        CHECK(lo <= 0.3);
        CHECK(hi >= 0.3);
        CounterStream rng(6, 0);
        for (int i = 0; i < 200; ++i) {
            const auto m = sample_gaussian_outer_product(5, rng);
            CHECK(rank_le_one(m));
            CHECK(rank_le_one(to_exact_dyadic(m)));
        }
    }
}

TEST_CASE("atom_rank_one_lower_bound") {
    CHECK(atom_rank_one_lower_bound(MatrixMeasure::iid(EntryMeasure::rademacher(), 2)) == mpq_class(1, 8));
    for (int k = 1; k <= 4; ++k)
        CHECK(atom_rank_one_lower_bound(MatrixMeasure::iid(EntryMeasure::atomic({{2.5, mpq_class(1)}}), k)) == 1);
    CHECK(atom_rank_one_lower_bound(MatrixMeasure::iid(EntryMeasure::gaussian(), 3)) == 0);
}

TEST_CASE("enumerate_support") {
    SUBCASE("Rademacher k=2: 16 patterns of mass 1/16") {
        const auto s = enumerate_support(MatrixMeasure::iid(EntryMeasure::rademacher(), 2));
        CHECK(s.size() == 16);
        for (const auto& w : s) CHECK(w.mass == mpq_class(1, 16));
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j) CHECK_FALSE(s[i].matrix == s[j].matrix);
    }
    SUBCASE("single support point") {
        const auto s = enumerate_support(MatrixMeasure::finite_support({{SquareMatrix::identity(3), mpq_class(1)}}));
        REQUIRE(s.size() == 1);
        CHECK(s[0].matrix == ExactMatrix::identity(3));
    }
    SUBCASE("{-1,0,1} with masses 1/4,1/2,1/4: 81 points summing to exactly 1") {
        const auto law = MatrixMeasure::iid(
            EntryMeasure::atomic({{-1, mpq_class(1, 4)}, {0, mpq_class(1, 2)}, {1, mpq_class(1, 4)}}), 2);
        const auto s = enumerate_support(law);
        CHECK(s.size() == 81);
        mpq_class total = 0;
        for (const auto& w : s) total += w.mass;
        CHECK(total == 1);
    }
    SUBCASE("budget and applicability") {
        const auto law = MatrixMeasure::iid(EntryMeasure::rademacher(), 5); // 2^25 points
        CHECK_THROWS_AS(enumerate_support(law), BudgetExceeded);
        CHECK_THROWS_AS(enumerate_support(MatrixMeasure::iid(EntryMeasure::rademacher(), 2), 15), BudgetExceeded);
        CHECK_THROWS_AS(enumerate_support(MatrixMeasure::iid(EntryMeasure::gaussian(), 2)), DomainError);
    }
}

TEST_CASE("exact_rank_le_one_probability") {
    CHECK(exact_rank_le_one_probability(MatrixMeasure::iid(EntryMeasure::rademacher(), 2)) == mpq_class(1, 2));
    CHECK(exact_rank_le_one_probability(MatrixMeasure::iid(EntryMeasure::atomic({{0, mpq_class(1)}}), 3)) == 1);

    const std::vector<EntryMeasure> atomic_laws = {
        EntryMeasure::rademacher(),
        EntryMeasure::atomic({{-1, mpq_class(1, 4)}, {0, mpq_class(1, 2)}, {1, mpq_class(1, 4)}}),
        EntryMeasure::atomic({{2, mpq_class(2, 3)}, {-3, mpq_class(1, 3)}}),
        EntryMeasure::atomic({{0, mpq_class(1, 10)}, {1, mpq_class(7, 10)}, {5, mpq_class(1, 5)}}),
    };
    for (const auto& e : atomic_laws)
        for (int k = 1; k <= 3; ++k) {
            const auto law = MatrixMeasure::iid(e, k);
            if (support_size(law) > 100000) continue;
            CHECK(exact_rank_le_one_probability(law) >= atom_rank_one_lower_bound(law));
        }
}

TEST_CASE("i.i.d. entries: row swap leaves the AllReal frequency unchanged") {
    const auto law = MatrixMeasure::iid(EntryMeasure::gaussian(), 3);
    const std::uint64_t n = 100000;
    std::uint64_t plain = 0, swapped = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        CounterStream rng(77, t);
        const SquareMatrix m = sample_matrix(law, rng);
        plain += classify_spectrum_float(m) == SpectrumClass::AllReal;
        CounterStream rng2(78, t);
        swapped += classify_spectrum_float(sample_matrix(law, rng2).row_swapped(0, 1)) == SpectrumClass::AllReal;
    }
    const auto a = wilson_interval(plain, n, 0.999);
    const auto b = wilson_interval(swapped, n, 0.999);
    CHECK(a.second >= b.first);
    CHECK(b.second >= a.first);
}

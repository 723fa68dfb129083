#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmprod/measures.hpp"
#include "rmprod/montecarlo.hpp"

namespace rmprod {

/// Confidence level of the one-sided statistical slack used when a Monte
/// Carlo estimate is compared against a closed-form lower bound.
inline constexpr double kBoundCheckConfidence = 0.999;

/// 1 - (1 - p1)^n, evaluated as -expm1(n log1p(-p1)).
double theorem1_bound(double p1, int n);
mpq_class theorem1_bound_exact(const mpq_class& p1, int n);

/// P(X_1 has rank <= 1), or a certified lower bound on it.
struct RankOneMass {
    double value = 0.0;
    std::optional<mpq_class> exact; // set when value is an exact rational
    std::string source;             // "enumeration", "atoms", "mixture", "monte-carlo"
};

/// Exact by enumeration when the measure is integer-valued and within
/// budget; otherwise the best certified or statistical lower bound
/// available (atom bound, mixture parameter, 99.9% Wilson lower bound of
/// a Monte Carlo rank tally).
RankOneMass rank_one_mass(const MatrixMeasure& m, std::uint64_t budget = kDefaultEnumerationBudget,
                          std::uint64_t mc_trials = 100'000, std::uint64_t seed = 0,
                          double rank_tol = kDefaultRankTol, unsigned workers = 0);

struct BoundReport {
    int n = 0;
    RankOneMass p1;
    double bound = 0.0;
    std::optional<mpq_class> bound_exact;
    std::optional<EstimateResult> estimate;
    std::optional<mpq_class> exact;
    bool satisfied = false;
    /// estimate lower value minus bound: exact - bound for exact inputs,
    /// 99.9% Wilson lower bound - bound for Monte Carlo inputs.
    double margin = 0.0;
};

/// Exact comparison P(all real) >= 1 - (1 - p1)^n in rational arithmetic.
/// p1.exact must be set.
BoundReport check_theorem1(int n, const RankOneMass& p1, const mpq_class& exact_probability);

/// Monte Carlo comparison. Indeterminate trials count as failures. The
/// bound is violated only when it exceeds the kBoundCheckConfidence Wilson
/// upper limit of the estimate.
BoundReport check_theorem1(int n, const RankOneMass& p1, const EstimateResult& estimate);

/// Sum over all n-tuples of support matrices of the tuple mass times
/// [the product has only real eigenvalues], in exact arithmetic. Throws
/// BudgetExceeded when (support size)^n > budget.
mpq_class exact_real_probability(const MatrixMeasure& m, int n,
                                 std::uint64_t budget = kDefaultEnumerationBudget, unsigned workers = 0);

/// Exact law of A_n = X_1 ... X_n as distinct products with masses. With
/// absorb_rank_one, products of rank <= 1 are removed from `states` and
/// their mass is added to `absorbed_mass` (they stay rank <= 1, hence
/// all-real, after any further multiplication).
struct ProductDistribution {
    std::vector<WeightedMatrix> states;
    mpq_class absorbed_mass = 0;
};

/// `budget` caps (distinct states) * (support size) per step.
ProductDistribution product_distribution(const MatrixMeasure& m, int n, bool absorb_rank_one,
                                         std::uint64_t budget = kDefaultEnumerationBudget);

/// Same quantity as exact_real_probability computed from the aggregated
/// product law. Reaches much larger n when products collapse.
mpq_class exact_real_probability_aggregated(const MatrixMeasure& m, int n,
                                            std::uint64_t budget = kDefaultEnumerationBudget);

/// D1 = (a+d)^2 - 4(ad - bc), the discriminant of [[a,b],[c,d]], and
/// D2 = (b+c)^2 - 4(bc - ad), the discriminant of the row-swapped matrix
/// [[c,d],[a,b]]. D1 + D2 = (a+d)^2 + (b+c)^2.
template <class T>
std::pair<T, T> discriminant_pair(const T& a, const T& b, const T& c, const T& d) {
    T s1 = a + d;
    T s2 = b + c;
    T ad = a * d;
    T bc = b * c;
    return {T(s1 * s1 - 4 * (ad - bc)), T(s2 * s2 - 4 * (bc - ad))};
}

struct LemmaReport {
    std::uint64_t samples = 0;
    std::uint64_t d1_nonneg = 0;
    std::uint64_t d2_nonneg = 0;
    std::uint64_t either_nonneg = 0;
    double confidence = kBoundCheckConfidence;
    std::pair<double, double> d1_ci;
    std::pair<double, double> d2_ci;
    bool cis_overlap = false;     // P(D1>=0) and P(D2>=0) statistically equal
    bool sure_event_holds = false; // either_nonneg == samples
    bool half_not_rejected = false; // Wilson upper limit of P(D1>=0) >= 1/2
    bool passed() const noexcept { return cis_overlap && sure_event_holds && half_not_rejected; }
};

/// Samples A_n for a 2x2 measure and checks the exchangeable-rows argument:
/// D1 and D2 equal in law, {D1 >= 0 or D2 >= 0} sure, P(D1 >= 0) >= 1/2.
/// Signs are evaluated exactly on the sampled (normalized) matrix.
LemmaReport lemma_exchangeable_check(const MatrixMeasure& m, int n, std::uint64_t samples,
                                     std::uint64_t seed, double confidence = kBoundCheckConfidence,
                                     unsigned workers = 0);

struct ExactLemmaReport {
    mpq_class p_d1_nonneg;
    mpq_class p_d2_nonneg;
    mpq_class p_either_nonneg;
};

/// Exact probabilities for integer-valued 2x2 measures.
ExactLemmaReport lemma_exchangeable_exact(const MatrixMeasure& m, int n,
                                          std::uint64_t budget = kDefaultEnumerationBudget);

} // namespace rmprod

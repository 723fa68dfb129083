#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "rmprod/error.hpp"
#include "rmprod/exact.hpp"
#include "rmprod/matrix.hpp"
#include "rmprod/rng.hpp"

namespace rmprod {

/// Default cap on the number of points an exact enumeration may visit.
inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// Masses that are not positive or do not sum to exactly one.
class MassError : public DomainError {
public:
    using DomainError::DomainError;
};

struct Gaussian {
    double mean = 0.0;
    double stddev = 1.0;
    friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
    friend bool operator==(const Uniform&, const Uniform&) = default;
};

struct Atom {
    double value = 0.0;
    mpq_class mass;
    friend bool operator==(const Atom& a, const Atom& b) { return a.value == b.value && a.mass == b.mass; }
};

/// Law of a single real entry: finitely many atoms plus an optional
/// continuous part. Pure Gaussian/Uniform laws are the atom-free case and
/// Rademacher is the mixture {+1: 1/2, -1: 1/2}.
class EntryMeasure {
public:
    using Continuous = std::variant<Gaussian, Uniform>;

    static EntryMeasure gaussian(double mean = 0.0, double stddev = 1.0);
    static EntryMeasure uniform(double lo = -1.0, double hi = 1.0);
    static EntryMeasure rademacher();
    /// Throws MassError unless atom masses are positive and
    /// sum(atoms) + continuous_weight == 1 exactly.
    static EntryMeasure atomic(std::vector<Atom> atoms, std::optional<Continuous> continuous = std::nullopt,
                               mpq_class continuous_weight = 0);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::optional<Continuous>& continuous() const noexcept { return continuous_; }
    const mpq_class& continuous_weight() const noexcept { return continuous_weight_; }

    bool has_atoms() const noexcept { return !atoms_.empty(); }
    /// Finite support made of integers only.
    bool is_integer_valued() const noexcept;

    double sample(CounterStream& rng) const;

    friend bool operator==(const EntryMeasure& a, const EntryMeasure& b) {
        return a.atoms_ == b.atoms_ && a.continuous_ == b.continuous_ &&
               a.continuous_weight_ == b.continuous_weight_;
    }

private:
    EntryMeasure() = default;
    void validate_and_cache();

    std::vector<Atom> atoms_;
    std::optional<Continuous> continuous_;
    mpq_class continuous_weight_ = 0;
    std::vector<double> cumulative_; // running atom masses as doubles
};

/// k x k matrix with i.i.d. entries.
struct IidEntries {
    EntryMeasure entry;
    friend bool operator==(const IidEntries&, const IidEntries&) = default;
};

/// With probability p1 a rank-one draw u v^T (u, v standard Gaussian
/// vectors), otherwise a matrix with i.i.d. entries from `generic`.
struct RankOneMixture {
    mpq_class p1;
    EntryMeasure generic;
    friend bool operator==(const RankOneMixture& a, const RankOneMixture& b) {
        return a.p1 == b.p1 && a.generic == b.generic;
    }
};

struct SupportPoint {
    SquareMatrix matrix;
    mpq_class mass;
    friend bool operator==(const SupportPoint& a, const SupportPoint& b) {
        return a.matrix == b.matrix && a.mass == b.mass;
    }
};

struct FiniteSupport {
    std::vector<SupportPoint> points;
    friend bool operator==(const FiniteSupport&, const FiniteSupport&) = default;
};

/// Law of one factor X_i of the product.
class MatrixMeasure {
public:
    using Law = std::variant<IidEntries, RankOneMixture, FiniteSupport>;

    static MatrixMeasure iid(EntryMeasure entry, int k);
    static MatrixMeasure rank_one_mixture(mpq_class p1, EntryMeasure generic, int k);
    static MatrixMeasure finite_support(std::vector<SupportPoint> points);

    int dim() const noexcept { return k_; }
    const Law& law() const noexcept { return law_; }

    /// Draws are exactly representable integers and the support is finite,
    /// so products can be formed without rounding.
    bool is_integer_valued() const noexcept;

    friend bool operator==(const MatrixMeasure&, const MatrixMeasure&) = default;

private:
    MatrixMeasure(int k, Law law);

    int k_;
    Law law_;
    std::vector<double> cumulative_; // finite support only
    friend SquareMatrix sample_matrix(const MatrixMeasure&, CounterStream&);
};

/// One draw. Deterministic in the stream state.
SquareMatrix sample_matrix(const MatrixMeasure& m, CounterStream& rng);

/// u v^T with u, v standard Gaussian vectors of length k, each entry
/// rounded to 26 significant bits so the result is exactly rank one.
SquareMatrix sample_gaussian_outer_product(int k, CounterStream& rng);

/// Probability that all k^2 entries hit the same atom: sum_x mass(x)^(k^2).
/// Lower bound on P(rank <= 1); zero for atom-free laws.
mpq_class atom_rank_one_lower_bound(const EntryMeasure& entry, int k);
mpq_class atom_rank_one_lower_bound(const MatrixMeasure& m);

struct WeightedMatrix {
    ExactMatrix matrix;
    mpq_class mass;
};

/// Number of support points enumerate_support would produce, saturating
/// at UINT64_MAX. Throws DomainError for laws without finite integer support.
std::uint64_t support_size(const MatrixMeasure& m);

/// Complete support with exact masses (summing to exactly 1). Requires an
/// integer-valued measure; throws BudgetExceeded past `budget` points.
std::vector<WeightedMatrix> enumerate_support(const MatrixMeasure& m,
                                              std::uint64_t budget = kDefaultEnumerationBudget);

/// Exact P(rank X <= 1) by enumeration with exact minor tests.
mpq_class exact_rank_le_one_probability(const MatrixMeasure& m,
                                        std::uint64_t budget = kDefaultEnumerationBudget);

} // namespace rmprod

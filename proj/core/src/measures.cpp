#include "rmprod/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmprod {

namespace {

bool is_integer_value(double x) {
    return std::isfinite(x) && std::trunc(x) == x && std::abs(x) <= 9007199254740992.0;
}

void check_continuous(const EntryMeasure::Continuous& c) {
    if (const auto* g = std::get_if<Gaussian>(&c)) {
        if (!std::isfinite(g->mean) || !std::isfinite(g->stddev) || g->stddev < 0.0)
            throw DomainError("gaussian: need finite mean and stddev >= 0");
    } else if (const auto* u = std::get_if<Uniform>(&c)) {
        if (!std::isfinite(u->lo) || !std::isfinite(u->hi) || !(u->lo < u->hi))
            throw DomainError("uniform: need finite lo < hi");
    }
}

double sample_continuous(const EntryMeasure::Continuous& c, CounterStream& rng) {
    if (const auto* g = std::get_if<Gaussian>(&c)) return g->mean + g->stddev * rng.normal();
    const auto& u = std::get<Uniform>(c);
    return u.lo + (u.hi - u.lo) * rng.uniform();
}

std::size_t pick(const std::vector<double>& cumulative, double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<std::size_t>(it - cumulative.begin());
}

} // namespace

EntryMeasure EntryMeasure::gaussian(double mean, double stddev) {
    EntryMeasure m;
    m.continuous_ = Gaussian{mean, stddev};
    m.continuous_weight_ = 1;
    m.validate_and_cache();
    return m;
}

EntryMeasure EntryMeasure::uniform(double lo, double hi) {
    EntryMeasure m;
    m.continuous_ = Uniform{lo, hi};
    m.continuous_weight_ = 1;
    m.validate_and_cache();
    return m;
}

EntryMeasure EntryMeasure::rademacher() {
    return atomic({{1.0, mpq_class(1, 2)}, {-1.0, mpq_class(1, 2)}});
}

EntryMeasure EntryMeasure::atomic(std::vector<Atom> atoms, std::optional<Continuous> continuous,
                                  mpq_class continuous_weight) {
    EntryMeasure m;
    m.atoms_ = std::move(atoms);
    m.continuous_ = std::move(continuous);
    m.continuous_weight_ = std::move(continuous_weight);
    m.validate_and_cache();
    return m;
}

void EntryMeasure::validate_and_cache() {
    mpq_class total = continuous_weight_;
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.value)) throw DomainError("atom value must be finite");
        if (sgn(a.mass) <= 0) throw MassError("atom masses must be positive");
        total += a.mass;
    }
    if (sgn(continuous_weight_) < 0) throw MassError("continuous weight must be nonnegative");
    if (sgn(continuous_weight_) > 0 && !continuous_)
        throw MassError("continuous weight given without a continuous part");
    if (continuous_ && sgn(continuous_weight_) == 0)
        throw MassError("continuous part given with zero weight");
    if (total != 1) throw MassError("mass sum " + to_string(total) + " != 1");
    if (continuous_) check_continuous(*continuous_);

    for (std::size_t i = 0; i < atoms_.size(); ++i)
        for (std::size_t j = i + 1; j < atoms_.size(); ++j)
            if (atoms_[i].value == atoms_[j].value)
                throw DomainError("duplicate atom value " + std::to_string(atoms_[i].value));

    cumulative_.clear();
    mpq_class run = 0;
    for (const auto& a : atoms_) {
        run += a.mass;
        cumulative_.push_back(run.get_d());
    }
}

bool EntryMeasure::is_integer_valued() const noexcept {
    if (continuous_) return false;
    return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return is_integer_value(a.value); });
}

double EntryMeasure::sample(CounterStream& rng) const {
    if (atoms_.empty()) return sample_continuous(*continuous_, rng);
    const double u = rng.uniform();
    const std::size_t i = pick(cumulative_, u);
    if (i < atoms_.size()) return atoms_[i].value;
    if (continuous_) return sample_continuous(*continuous_, rng);
    return atoms_.back().value; // masses sum to 1; guards double rounding at the top end
}

MatrixMeasure::MatrixMeasure(int k, Law law) : k_(k), law_(std::move(law)) {
    if (k < 1 || k > kMaxDim)
        throw DimensionError("matrix dimension " + std::to_string(k) + " outside [1, " +
                             std::to_string(kMaxDim) + "]");
}

MatrixMeasure MatrixMeasure::iid(EntryMeasure entry, int k) {
    return MatrixMeasure(k, IidEntries{std::move(entry)});
}

MatrixMeasure MatrixMeasure::rank_one_mixture(mpq_class p1, EntryMeasure generic, int k) {
    if (sgn(p1) <= 0 || p1 > 1) throw MassError("rank-one mixture needs 0 < p1 <= 1");
    return MatrixMeasure(k, RankOneMixture{std::move(p1), std::move(generic)});
}

MatrixMeasure MatrixMeasure::finite_support(std::vector<SupportPoint> points) {
    if (points.empty()) throw MassError("finite support must be nonempty");
    const int k = points.front().matrix.dim();
    mpq_class total = 0;
    for (const auto& p : points) {
        if (p.matrix.dim() != k) throw DimensionError("finite support: mixed matrix dimensions");
        if (sgn(p.mass) <= 0) throw MassError("support masses must be positive");
        total += p.mass;
    }
    if (total != 1) throw MassError("mass sum " + to_string(total) + " != 1");
    MatrixMeasure m(k, FiniteSupport{std::move(points)});
    mpq_class run = 0;
    for (const auto& p : std::get<FiniteSupport>(m.law_).points) {
        run += p.mass;
        m.cumulative_.push_back(run.get_d());
    }
    return m;
}

bool MatrixMeasure::is_integer_valued() const noexcept {
    if (const auto* iid = std::get_if<IidEntries>(&law_)) return iid->entry.is_integer_valued();
    if (const auto* fs = std::get_if<FiniteSupport>(&law_))
        return std::all_of(fs->points.begin(), fs->points.end(),
                           [](const SupportPoint& p) { return is_integral(p.matrix); });
    return false;
}

namespace {

// Keeps 26 significant bits so that every product u_i * v_j is exact and
// the sampled outer product has rank one in floating point too.
double short_mantissa(double x) {
    if (x == 0.0) return x;
    int e = 0;
    const double frac = std::frexp(x, &e);
    return std::ldexp(std::nearbyint(std::ldexp(frac, 26)), e - 26);
}

} // namespace

SquareMatrix sample_gaussian_outer_product(int k, CounterStream& rng) {
    std::array<double, kMaxDim> u{}, v{};
    for (int i = 0; i < k; ++i) u[i] = short_mantissa(rng.normal());
    for (int i = 0; i < k; ++i) v[i] = short_mantissa(rng.normal());
    SquareMatrix m(k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) m(r, c) = u[r] * v[c];
    return m;
}

namespace {

SquareMatrix sample_iid(const EntryMeasure& e, int k, CounterStream& rng) {
    SquareMatrix m(k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) m(r, c) = e.sample(rng);
    return m;
}

} // namespace

SquareMatrix sample_matrix(const MatrixMeasure& m, CounterStream& rng) {
    const int k = m.dim();
    return std::visit(
        [&](const auto& law) -> SquareMatrix {
            using L = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<L, IidEntries>) {
                return sample_iid(law.entry, k, rng);
            } else if constexpr (std::is_same_v<L, RankOneMixture>) {
                if (rng.uniform() < law.p1.get_d()) return sample_gaussian_outer_product(k, rng);
                return sample_iid(law.generic, k, rng);
            } else {
                const std::size_t i = std::min(pick(m.cumulative_, rng.uniform()), law.points.size() - 1);
                return law.points[i].matrix;
            }
        },
        m.law());
}

mpq_class atom_rank_one_lower_bound(const EntryMeasure& entry, int k) {
    mpq_class total = 0;
    const unsigned long cells = static_cast<unsigned long>(k * k);
    for (const auto& a : entry.atoms()) {
        mpz_class num, den;
        mpz_pow_ui(num.get_mpz_t(), a.mass.get_num_mpz_t(), cells);
        mpz_pow_ui(den.get_mpz_t(), a.mass.get_den_mpz_t(), cells);
        total += mpq_class(num, den);
    }
    total.canonicalize();
    return total;
}

mpq_class atom_rank_one_lower_bound(const MatrixMeasure& m) {
    const auto* iid = std::get_if<IidEntries>(&m.law());
    if (!iid) throw DomainError("atom_rank_one_lower_bound needs an i.i.d.-entry measure");
    return atom_rank_one_lower_bound(iid->entry, m.dim());
}

std::uint64_t support_size(const MatrixMeasure& m) {
    if (!m.is_integer_valued())
        throw DomainError("exact enumeration needs an integer-valued finite-support measure");
    if (const auto* fs = std::get_if<FiniteSupport>(&m.law())) return fs->points.size();
    const auto& entry = std::get<IidEntries>(m.law()).entry;
    const std::uint64_t base = entry.atoms().size();
    std::uint64_t total = 1;
    for (int i = 0; i < m.dim() * m.dim(); ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        total *= base;
    }
    return total;
}

std::vector<WeightedMatrix> enumerate_support(const MatrixMeasure& m, std::uint64_t budget) {
    const std::uint64_t size = support_size(m);
    if (size > budget) throw BudgetExceeded("support enumeration exceeds budget", size, budget);

    std::vector<WeightedMatrix> out;
    out.reserve(size);
    if (const auto* fs = std::get_if<FiniteSupport>(&m.law())) {
        for (const auto& p : fs->points) out.push_back({to_exact(p.matrix), p.mass});
        return out;
    }

    const auto& atoms = std::get<IidEntries>(m.law()).entry.atoms();
    const int k = m.dim();
    const int cells = k * k;
    std::vector<std::size_t> digit(static_cast<std::size_t>(cells), 0);
    for (std::uint64_t n = 0; n < size; ++n) {
        std::vector<mpz_class> entries;
        entries.reserve(digit.size());
        mpq_class mass = 1;
        for (std::size_t d : digit) {
            entries.emplace_back(atoms[d].value);
            mass *= atoms[d].mass;
        }
        out.push_back({ExactMatrix(k, std::move(entries)), std::move(mass)});
        // odometer increment, last cell fastest
        for (int c = cells - 1; c >= 0; --c) {
            if (++digit[c] < atoms.size()) break;
            digit[c] = 0;
        }
    }
    return out;
}

mpq_class exact_rank_le_one_probability(const MatrixMeasure& m, std::uint64_t budget) {
    mpq_class total = 0;
    for (const auto& w : enumerate_support(m, budget))
        if (rank_le_one(w.matrix)) total += w.mass;
    total.canonicalize();
    return total;
}

} // namespace rmprod

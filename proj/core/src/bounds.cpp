#include "rmprod/bounds.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <atomic>
#include <map>
#include <mutex>

namespace rmprod {

double theorem1_bound(double p1, int n) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("theorem1_bound: p1 must lie in [0, 1]");
    if (n < 1) throw DomainError("theorem1_bound: n must be >= 1");
    if (p1 == 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-p1));
}

mpq_class theorem1_bound_exact(const mpq_class& p1, int n) {
    if (sgn(p1) < 0 || p1 > 1) throw DomainError("theorem1_bound: p1 must lie in [0, 1]");
    if (n < 1) throw DomainError("theorem1_bound: n must be >= 1");
    const mpq_class miss = 1 - p1;
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), miss.get_num_mpz_t(), static_cast<unsigned long>(n));
    mpz_pow_ui(den.get_mpz_t(), miss.get_den_mpz_t(), static_cast<unsigned long>(n));
    mpq_class out = 1 - mpq_class(num, den);
    out.canonicalize();
    return out;
}

RankOneMass rank_one_mass(const MatrixMeasure& m, std::uint64_t budget, std::uint64_t mc_trials,
                          std::uint64_t seed, double rank_tol, unsigned workers) {
    if (m.is_integer_valued() && support_size(m) <= budget) {
        const mpq_class p = exact_rank_le_one_probability(m, budget);
        return {p.get_d(), p, "enumeration"};
    }
    if (const auto* mix = std::get_if<RankOneMixture>(&m.law())) {
        mpq_class p = mix->p1 + (1 - mix->p1) * atom_rank_one_lower_bound(mix->generic, m.dim());
        p.canonicalize();
        return {p.get_d(), p, "mixture"};
    }
    if (const auto* fs = std::get_if<FiniteSupport>(&m.law())) {
        mpq_class p = 0;
        for (const auto& pt : fs->points)
            if (rank_le_one(pt.matrix, rank_tol)) p += pt.mass;
        p.canonicalize();
        return {p.get_d(), p, "support"};
    }
    const mpq_class atoms = atom_rank_one_lower_bound(m);
    const RankTally tally = estimate_rank_le_one(m, mc_trials, seed, rank_tol, workers);
    const double mc_lo = wilson_interval(tally.rank_le_one, tally.trials, kBoundCheckConfidence).first;
    if (atoms.get_d() >= mc_lo) return {atoms.get_d(), atoms, "atoms"};
    return {mc_lo, std::nullopt, "monte-carlo"};
}

BoundReport check_theorem1(int n, const RankOneMass& p1, const mpq_class& exact_probability) {
    if (!p1.exact) throw DomainError("exact bound check needs an exact rank-one mass");
    BoundReport r;
    r.n = n;
    r.p1 = p1;
    r.bound_exact = theorem1_bound_exact(*p1.exact, n);
    r.bound = r.bound_exact->get_d();
    r.exact = exact_probability;
    r.satisfied = exact_probability >= *r.bound_exact;
    r.margin = mpq_class(exact_probability - *r.bound_exact).get_d();
    return r;
}

BoundReport check_theorem1(int n, const RankOneMass& p1, const EstimateResult& estimate) {
    BoundReport r;
    r.n = n;
    r.p1 = p1;
    if (p1.exact) {
        r.bound_exact = theorem1_bound_exact(*p1.exact, n);
        r.bound = r.bound_exact->get_d();
    } else {
        r.bound = theorem1_bound(p1.value, n);
    }
    r.estimate = estimate;
    // A violation is declared only when even the optimistic count (every
    // Indeterminate trial taken as real) is confidently below the bound.
    const double hi =
        wilson_interval(estimate.all_real + estimate.indeterminate, estimate.trials, kBoundCheckConfidence).second;
    const double lo = wilson_interval(estimate.all_real, estimate.trials, kBoundCheckConfidence).first;
    r.satisfied = hi >= r.bound;
    r.margin = lo - r.bound;
    return r;
}

namespace {

std::uint64_t checked_power(std::uint64_t base, int n) {
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        if (base != 0 && total > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        total *= base;
    }
    return total;
}

} // namespace

mpq_class exact_real_probability(const MatrixMeasure& m, int n, std::uint64_t budget, unsigned workers) {
    if (n < 1) throw DomainError("exact_real_probability: n must be >= 1");
    const std::uint64_t tuples = checked_power(support_size(m), n);
    if (tuples > budget) throw BudgetExceeded("tuple enumeration exceeds budget", tuples, budget);
    const std::vector<WeightedMatrix> support = enumerate_support(m, budget);

    mpq_class total = 0;
    std::mutex total_mutex;
    parallel_for_chunks(support.size(), workers, [&](std::uint64_t begin, std::uint64_t end) {
        mpq_class local = 0;
        std::function<void(int, const ExactMatrix&, const mpq_class&)> visit =
            [&](int depth, const ExactMatrix& prefix, const mpq_class& mass) {
                if (depth == n) {
                    if (classify_spectrum_exact(prefix) == SpectrumClass::AllReal) local += mass;
                    return;
                }
                for (const auto& s : support) visit(depth + 1, multiply(prefix, s.matrix), mass * s.mass);
            };
        for (std::uint64_t i = begin; i < end; ++i) visit(1, support[i].matrix, support[i].mass);
        std::lock_guard lock(total_mutex);
        total += local;
    });
    total.canonicalize();
    return total;
}

ProductDistribution product_distribution(const MatrixMeasure& m, int n, bool absorb_rank_one,
                                         std::uint64_t budget) {
    if (n < 1) throw DomainError("product_distribution: n must be >= 1");
    const std::vector<WeightedMatrix> support = enumerate_support(m, budget);

    ProductDistribution out;
    std::map<ExactMatrix, mpq_class> current;
    auto deposit = [&](std::map<ExactMatrix, mpq_class>& into, ExactMatrix mat, const mpq_class& mass) {
        if (absorb_rank_one && rank_le_one(mat)) {
            out.absorbed_mass += mass;
            return;
        }
        auto [it, inserted] = into.try_emplace(std::move(mat), mass);
        if (!inserted) it->second += mass;
    };
    for (const auto& s : support) deposit(current, s.matrix, s.mass);

    for (int step = 2; step <= n && !current.empty(); ++step) {
        const std::uint64_t work = checked_power(current.size(), 1) * support.size();
        if (work > budget) throw BudgetExceeded("product distribution exceeds budget", work, budget);
        std::map<ExactMatrix, mpq_class> next;
        for (const auto& [mat, mass] : current)
            for (const auto& s : support) deposit(next, multiply(mat, s.matrix), mass * s.mass);
        current = std::move(next);
    }
    out.states.reserve(current.size());
    for (auto& [mat, mass] : current) out.states.push_back({mat, mass});
    out.absorbed_mass.canonicalize();
    return out;
}

mpq_class exact_real_probability_aggregated(const MatrixMeasure& m, int n, std::uint64_t budget) {
    const ProductDistribution dist = product_distribution(m, n, true, budget);
    mpq_class total = dist.absorbed_mass;
    for (const auto& s : dist.states)
        if (classify_spectrum_exact(s.matrix) == SpectrumClass::AllReal) total += s.mass;
    total.canonicalize();
    return total;
}

LemmaReport lemma_exchangeable_check(const MatrixMeasure& m, int n, std::uint64_t samples,
                                     std::uint64_t seed, double confidence, unsigned workers) {
    if (m.dim() != 2) throw DimensionError("lemma check needs 2x2 matrices");
    if (n < 1) throw DomainError("lemma check: n must be >= 1");
    if (samples < 1) throw DomainError("lemma check: samples must be >= 1");
    const bool exact = m.is_integer_valued();
    const std::uint64_t key = mix64(seed ^ 0x4c454d4d41ULL ^ mix64(static_cast<std::uint64_t>(n)));

    std::atomic<std::uint64_t> d1{0}, d2{0}, either{0};
    parallel_for_chunks(samples, workers, [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t c1 = 0, c2 = 0, ce = 0;
        for (std::uint64_t t = begin; t < end; ++t) {
            CounterStream rng(key, t);
            int s1 = 0, s2 = 0;
            if (exact) {
                ExactMatrix acc = to_exact(sample_matrix(m, rng));
                for (int i = 1; i < n; ++i) acc = multiply(acc, to_exact(sample_matrix(m, rng)));
                const auto [a, b] = discriminant_pair<mpz_class>(acc(0, 0), acc(0, 1), acc(1, 0), acc(1, 1));
                s1 = sgn(a);
                s2 = sgn(b);
            } else {
                RescaledProduct prod(2);
                for (int i = 0; i < n; ++i) prod.append(sample_matrix(m, rng));
                const SquareMatrix& x = prod.result().matrix;
                const auto [a, b] = discriminant_pair<mpq_class>(mpq_class(x(0, 0)), mpq_class(x(0, 1)),
                                                                 mpq_class(x(1, 0)), mpq_class(x(1, 1)));
                s1 = sgn(a);
                s2 = sgn(b);
            }
            c1 += s1 >= 0;
            c2 += s2 >= 0;
            ce += (s1 >= 0 || s2 >= 0);
        }
        d1 += c1;
        d2 += c2;
        either += ce;
    });

    LemmaReport r;
    r.samples = samples;
    r.d1_nonneg = d1.load();
    r.d2_nonneg = d2.load();
    r.either_nonneg = either.load();
    r.confidence = confidence;
    r.d1_ci = wilson_interval(r.d1_nonneg, samples, confidence);
    r.d2_ci = wilson_interval(r.d2_nonneg, samples, confidence);
    r.cis_overlap = r.d1_ci.second >= r.d2_ci.first && r.d2_ci.second >= r.d1_ci.first;
    r.sure_event_holds = r.either_nonneg == samples;
    r.half_not_rejected = r.d1_ci.second >= 0.5;
    return r;
}

ExactLemmaReport lemma_exchangeable_exact(const MatrixMeasure& m, int n, std::uint64_t budget) {
    if (m.dim() != 2) throw DimensionError("lemma check needs 2x2 matrices");
    const ProductDistribution dist = product_distribution(m, n, false, budget);
    ExactLemmaReport r{0, 0, 0};
    for (const auto& s : dist.states) {
        const auto& x = s.matrix;
        const auto [a, b] = discriminant_pair<mpz_class>(x(0, 0), x(0, 1), x(1, 0), x(1, 1));
        if (sgn(a) >= 0) r.p_d1_nonneg += s.mass;
        if (sgn(b) >= 0) r.p_d2_nonneg += s.mass;
        if (sgn(a) >= 0 || sgn(b) >= 0) r.p_either_nonneg += s.mass;
    }
    r.p_d1_nonneg.canonicalize();
    r.p_d2_nonneg.canonicalize();
    r.p_either_nonneg.canonicalize();
    return r;
}

} // namespace rmprod

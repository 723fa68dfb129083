#include "rmprod/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <boost/math/distributions/normal.hpp>

namespace rmprod {

void TrialConfig::validate() const {
    if (k < 1 || k > kMaxDim)
        throw DimensionError("k = " + std::to_string(k) + " outside [1, " + std::to_string(kMaxDim) + "]");
    if (measure.dim() != k)
        throw DimensionError("measure dimension " + std::to_string(measure.dim()) + " != k = " +
                             std::to_string(k));
    if (n < 1) throw DomainError("product length n must be >= 1");
    if (trials < 1) throw DomainError("trials must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
    if (!(policy.tau > 0.0)) throw DomainError("tau must be positive");
}

double normal_quantile_two_sided(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
    const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, 0.5 + confidence / 2.0);
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
    if (trials == 0) throw DomainError("wilson_interval: trials must be >= 1");
    if (successes > trials) throw DomainError("wilson_interval: successes > trials");
    const double z = normal_quantile_two_sided(confidence);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    double lo = std::max(0.0, center - half);
    double hi = std::min(1.0, center + half);
    if (successes == 0) lo = 0.0;
    if (successes == trials) hi = 1.0;
    return {lo, hi};
}

void finalize(EstimateResult& r, double confidence) {
    r.confidence = confidence;
    const double n = static_cast<double>(r.trials);
    r.p_hat = static_cast<double>(r.all_real) / n;
    r.p_hat_upper = static_cast<double>(r.all_real + r.indeterminate) / n;
    std::tie(r.ci_lo, r.ci_hi) = wilson_interval(r.all_real, r.trials, confidence);
}

std::uint64_t stream_key(std::uint64_t seed, int n) {
    return mix64(seed ^ mix64(0x50524f44ULL + static_cast<std::uint64_t>(n)));
}

unsigned resolve_workers(unsigned requested) noexcept {
    if (requested != 0) return requested;
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for_chunks(std::uint64_t count, unsigned workers,
                         const std::function<void(std::uint64_t, std::uint64_t)>& body) {
    workers = resolve_workers(workers);
    const std::uint64_t chunk = std::max<std::uint64_t>(1, std::min<std::uint64_t>(4096, count / (8 * workers) + 1));
    if (workers == 1 || count <= chunk) {
        body(0, count);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        try {
            for (;;) {
                const std::uint64_t begin = next.fetch_add(chunk);
                if (begin >= count) break;
                body(begin, std::min(count, begin + chunk));
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

namespace {

struct Tally {
    std::uint64_t all_real = 0;
    std::uint64_t complex_pair = 0;
    std::uint64_t indeterminate = 0;
    double max_abs_log_scale = 0.0;

    void add(SpectrumClass c) {
        switch (c) {
        case SpectrumClass::AllReal: ++all_real; break;
        case SpectrumClass::HasComplexPair: ++complex_pair; break;
        case SpectrumClass::Indeterminate: ++indeterminate; break;
        }
    }
    void merge(const Tally& o) {
        all_real += o.all_real;
        complex_pair += o.complex_pair;
        indeterminate += o.indeterminate;
        // NaN compares false either way; keep it visible.
        if (!(o.max_abs_log_scale <= max_abs_log_scale)) max_abs_log_scale = o.max_abs_log_scale;
    }
};

SpectrumClass exact_verdict(const std::vector<SquareMatrix>& factors) {
    ExactMatrix acc = to_exact_dyadic(factors.front());
    for (std::size_t i = 1; i < factors.size() && !acc.is_zero(); ++i)
        acc = multiply(acc, to_exact_dyadic(factors[i]));
    return classify_spectrum_exact(acc);
}

SpectrumClass one_trial(const TrialConfig& cfg, bool keep_factors, CounterStream& rng, Tally& tally,
                        std::vector<SquareMatrix>& factors) {
    factors.clear();
    if (cfg.policy.mode == ClassifyPolicy::Mode::ExactOnly) {
        for (int i = 0; i < cfg.n; ++i) factors.push_back(sample_matrix(cfg.measure, rng));
        return exact_verdict(factors);
    }
    RescaledProduct prod(cfg.k);
    for (int i = 0; i < cfg.n; ++i) {
        SquareMatrix f = sample_matrix(cfg.measure, rng);
        if (keep_factors) factors.push_back(f);
        prod.append(f);
        const auto& r = prod.result();
        if (r.is_zero && r.min_step_ratio >= kCancellationGuard) break; // certified zero
    }
    const ScaledMatrix& result = prod.result();
    const double ls = std::abs(result.log_scale);
    if (!(ls <= tally.max_abs_log_scale)) tally.max_abs_log_scale = ls;
    SpectrumClass v = classify_spectrum_float(result, cfg.policy.tau);
    if (v == SpectrumClass::Indeterminate && keep_factors) v = exact_verdict(factors);
    return v;
}

} // namespace

EstimateResult run_trials(const TrialConfig& cfg) {
    cfg.validate();
    const bool keep_factors = cfg.policy.mode == ClassifyPolicy::Mode::FloatWithExactFallback;
    const std::uint64_t key = stream_key(cfg.seed, cfg.n);

    Tally total;
    std::mutex merge_mutex;
    parallel_for_chunks(cfg.trials, cfg.workers, [&](std::uint64_t begin, std::uint64_t end) {
        Tally local;
        std::vector<SquareMatrix> factors;
        factors.reserve(static_cast<std::size_t>(cfg.n));
        for (std::uint64_t t = begin; t < end; ++t) {
            CounterStream rng(key, t);
            local.add(one_trial(cfg, keep_factors, rng, local, factors));
        }
        std::lock_guard lock(merge_mutex);
        total.merge(local);
    });

    EstimateResult r;
    r.trials = cfg.trials;
    r.all_real = total.all_real;
    r.complex_pair = total.complex_pair;
    r.indeterminate = total.indeterminate;
    r.max_abs_log_scale = total.max_abs_log_scale;
    finalize(r, cfg.confidence);
    return r;
}

SweepResult sweep(const TrialConfig& templ, const std::vector<int>& n_values) {
    if (n_values.empty()) throw DomainError("sweep: empty n list");
    for (std::size_t i = 1; i < n_values.size(); ++i)
        if (n_values[i] <= n_values[i - 1]) throw DomainError("sweep: n values must be strictly increasing");
    SweepResult out;
    out.k = templ.k;
    out.seed = templ.seed;
    for (int n : n_values) {
        TrialConfig cfg = templ;
        cfg.n = n;
        out.points.push_back({n, run_trials(cfg)});
    }
    return out;
}

RankTally estimate_rank_le_one(const MatrixMeasure& m, std::uint64_t trials, std::uint64_t seed,
                               double rank_tol, unsigned workers) {
    const std::uint64_t key = mix64(seed ^ 0x52414e4b31ULL);
    const bool exact = m.is_integer_valued();
    std::atomic<std::uint64_t> hits{0};
    parallel_for_chunks(trials, workers, [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t local = 0;
        for (std::uint64_t t = begin; t < end; ++t) {
            CounterStream rng(key, t);
            const SquareMatrix x = sample_matrix(m, rng);
            if (exact ? rank_le_one(to_exact(x)) : rank_le_one(x, rank_tol)) ++local;
        }
        hits += local;
    });
    return {trials, hits.load()};
}

} // namespace rmprod

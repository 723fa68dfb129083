#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rmprod/measures.hpp"
#include "rmprod/spectra.hpp"

namespace rmprod {

struct TrialConfig {
    int k = 2;
    int n = 1;
    MatrixMeasure measure = MatrixMeasure::iid(EntryMeasure::gaussian(), 2);
    std::uint64_t trials = 100'000;
    std::uint64_t seed = 0;
    ClassifyPolicy policy = ClassifyPolicy::with_fallback();
    double confidence = 0.95;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned workers = 0;

    /// Throws DomainError/DimensionError when a field is out of range.
    void validate() const;
};

struct EstimateResult {
    std::uint64_t trials = 0;
    std::uint64_t all_real = 0;
    std::uint64_t complex_pair = 0;
    std::uint64_t indeterminate = 0;
    double confidence = 0.95;
    double p_hat = 0.0;       // all_real / trials
    double ci_lo = 0.0;       // Wilson interval for p_hat
    double ci_hi = 0.0;
    double p_hat_upper = 0.0; // (all_real + indeterminate) / trials
    /// Largest |log_scale| over all rescaled products; finite unless
    /// something overflowed.
    double max_abs_log_scale = 0.0;
};

/// Fills p_hat, p_hat_upper and the Wilson interval from the tallies.
void finalize(EstimateResult& r, double confidence);

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence);

/// Two-sided normal quantile z with P(|Z| <= z) = confidence.
double normal_quantile_two_sided(double confidence);

/// Stream key for the (seed, n) pair; keeps runs at different n
/// independent while staying reproducible.
std::uint64_t stream_key(std::uint64_t seed, int n);

/// Estimates P(X_1 ... X_n has only real eigenvalues). Trial t uses
/// the counter stream (stream_key(seed, n), t), so the tallies do not
/// depend on the worker count.
EstimateResult run_trials(const TrialConfig& cfg);

struct SweepPoint {
    int n;
    EstimateResult estimate;
};

struct SweepResult {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<SweepPoint> points; // n strictly increasing
};

SweepResult sweep(const TrialConfig& templ, const std::vector<int>& n_values);

struct RankTally {
    std::uint64_t trials = 0;
    std::uint64_t rank_le_one = 0;
};

/// Monte Carlo frequency of {rank X_1 <= 1} for measures without an exact
/// enumeration.
RankTally estimate_rank_le_one(const MatrixMeasure& m, std::uint64_t trials, std::uint64_t seed,
                               double rank_tol = kDefaultRankTol, unsigned workers = 0);

/// Runs body(begin, end) over [0, count) in contiguous chunks on `workers`
/// threads (0 = hardware concurrency). Chunks are claimed dynamically.
void parallel_for_chunks(std::uint64_t count, unsigned workers,
                         const std::function<void(std::uint64_t, std::uint64_t)>& body);

unsigned resolve_workers(unsigned requested) noexcept;

} // namespace rmprod

#include <chrono>
#include <ctime>
#include <random>

#include "rmprod/cli/record.hpp"

#ifndef RMPROD_VERSION
#define RMPROD_VERSION "0.0.0"
#endif

namespace rmprod::cli {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

TrialConfig trial_config(const ExperimentConfig& cfg, const MatrixMeasure& m, int n) {
    TrialConfig t;
    t.k = cfg.k;
    t.n = n;
    t.measure = m;
    t.trials = cfg.trials;
    t.seed = *cfg.seed;
    t.policy = build_policy(cfg);
    t.confidence = cfg.confidence;
    t.workers = cfg.workers;
    return t;
}

// Exact P(all real) for an integer-valued law along the configured route.
// "auto" aggregates: same value as tuple enumeration, and the number of
// distinct partial products never exceeds the number of tuples.
void fill_exact(ResultRow& row, const MatrixMeasure& m, const ExperimentConfig& cfg) {
    const std::string route = cfg.route == "auto" ? "aggregate" : cfg.route;
    row.route = route;
    row.exact = route == "tuples" ? exact_real_probability(m, row.n, cfg.budget, cfg.workers)
                                  : exact_real_probability_aggregated(m, row.n, cfg.budget);
}

// Rank-one mass without sampling, for integer-valued laws.
RankOneMass certified_rank_one_mass(const MatrixMeasure& m, std::uint64_t budget) {
    if (support_size(m) <= budget) {
        const mpq_class p = exact_rank_le_one_probability(m, budget);
        return {p.get_d(), p, "enumeration"};
    }
    const mpq_class p = atom_rank_one_lower_bound(m);
    return {p.get_d(), p, "atoms"};
}

void apply(ResultRow& row, const BoundReport& b) {
    row.bound = b.bound;
    row.bound_exact = b.bound_exact;
    row.satisfied = b.satisfied;
    row.margin = b.margin;
}

void run_bound_check(ResultRecord& rec, const MatrixMeasure& m) {
    const ExperimentConfig& cfg = rec.config;
    const bool exact = m.is_integer_valued();
    rec.p1 = exact ? certified_rank_one_mass(m, cfg.budget)
                   : rank_one_mass(m, cfg.budget, cfg.trials, *cfg.seed, cfg.rank_tol, cfg.workers);
    bool passed = true;
    for (int n : cfg.n) {
        ResultRow row;
        row.n = n;
        if (exact) {
            fill_exact(row, m, cfg);
            apply(row, check_theorem1(n, *rec.p1, *row.exact));
        } else {
            row.estimate = run_trials(trial_config(cfg, m, n));
            apply(row, check_theorem1(n, *rec.p1, *row.estimate));
        }
        passed = passed && *row.satisfied;
        rec.rows.push_back(std::move(row));
    }
    rec.passed = passed;
}

void run_lemma_check(ResultRecord& rec, const MatrixMeasure& m) {
    const ExperimentConfig& cfg = rec.config;
    const mpq_class half(1, 2);
    bool passed = true;
    for (int n : cfg.n) {
        ResultRow row;
        row.n = n;
        LemmaRow lemma;
        lemma.sampled = lemma_exchangeable_check(m, n, cfg.trials, *cfg.seed, kBoundCheckConfidence, cfg.workers);
        bool ok = lemma.sampled.passed();
        if (m.is_integer_valued()) {
            try {
                lemma.exact = lemma_exchangeable_exact(m, n, cfg.budget);
            } catch (const BudgetExceeded&) {
                // the sampled check still stands on its own
            }
        }
        if (lemma.exact) {
            row.exact = lemma.exact->p_d1_nonneg;
            row.route = "aggregate";
            ok = ok && lemma.exact->p_d1_nonneg >= half && lemma.exact->p_d1_nonneg == lemma.exact->p_d2_nonneg &&
                 lemma.exact->p_either_nonneg == 1;
        }
        EstimateResult e;
        e.trials = lemma.sampled.samples;
        e.all_real = lemma.sampled.d1_nonneg;
        e.complex_pair = e.trials - e.all_real;
        finalize(e, cfg.confidence);
        row.estimate = e;
        row.bound = 0.5;
        row.bound_exact = half;
        row.satisfied = ok;
        row.margin = lemma.sampled.d1_ci.first - 0.5;
        row.lemma = std::move(lemma);
        passed = passed && ok;
        rec.rows.push_back(std::move(row));
    }
    rec.passed = passed;
}

} // namespace

std::string tool_version() { return RMPROD_VERSION; }

ResultRecord execute(ExperimentConfig cfg) {
    normalize(cfg.measure);
    validate(cfg);
    if (!cfg.seed) cfg.seed = fresh_seed();
    const auto start = std::chrono::steady_clock::now();

    ResultRecord rec;
    rec.config = cfg;
    rec.version = tool_version();
    rec.timestamp = utc_timestamp();
    const MatrixMeasure m = build_measure(cfg.measure, cfg.k);

    switch (cfg.command) {
    case Command::Estimate:
    case Command::Sweep: {
        const SweepResult s = sweep(trial_config(cfg, m, cfg.n.front()), cfg.n);
        for (const auto& p : s.points) {
            ResultRow row;
            row.n = p.n;
            row.estimate = p.estimate;
            rec.rows.push_back(std::move(row));
        }
        break;
    }
    case Command::Oracle:
        rec.p1 = certified_rank_one_mass(m, cfg.budget);
        for (int n : cfg.n) {
            ResultRow row;
            row.n = n;
            fill_exact(row, m, cfg);
            row.bound_exact = theorem1_bound_exact(*rec.p1->exact, n);
            row.bound = row.bound_exact->get_d();
            rec.rows.push_back(std::move(row));
        }
        break;
    case Command::BoundCheck: run_bound_check(rec, m); break;
    case Command::LemmaCheck: run_lemma_check(rec, m); break;
    }

    rec.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

} // namespace rmprod::cli

#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "rmprod/bounds.hpp"
#include "rmprod/cli/config.hpp"
#include "rmprod/montecarlo.hpp"

namespace rmprod::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitBadInput = 1,
    kExitBoundViolated = 2,
    kExitBudgetExceeded = 3,
};

struct LemmaRow {
    LemmaReport sampled;
    std::optional<ExactLemmaReport> exact;
};

/// One product length. For lemma-check the estimate counts {D1 >= 0}
/// among the samples and `bound` is 1/2.
struct ResultRow {
    int n = 0;
    std::optional<EstimateResult> estimate;
    std::optional<mpq_class> exact;
    std::string route; // how `exact` was obtained: tuples or aggregate
    std::optional<double> bound;
    std::optional<mpq_class> bound_exact;
    std::optional<bool> satisfied;
    std::optional<double> margin;
    std::optional<LemmaRow> lemma;
};

struct ResultRecord {
    ExperimentConfig config; // seed always set
    std::string version;
    std::string timestamp; // UTC, ISO 8601
    double elapsed_seconds = 0.0;
    std::optional<RankOneMass> p1;
    std::vector<ResultRow> rows;
    std::optional<bool> passed; // bound-check and lemma-check only

    int exit_code() const noexcept { return passed.value_or(true) ? kExitOk : kExitBoundViolated; }
};

/// Validates, fills a missing seed, and runs the command. Throws
/// ConfigError on bad input and BudgetExceeded when an exact route runs
/// out of budget.
ResultRecord execute(ExperimentConfig cfg);

std::string tool_version();

} // namespace rmprod::cli

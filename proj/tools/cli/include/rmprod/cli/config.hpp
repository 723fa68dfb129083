#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rmprod/error.hpp"
#include "rmprod/measures.hpp"
#include "rmprod/spectra.hpp"

namespace rmprod::cli {

using Json = nlohmann::ordered_json;

/// Any invalid experiment description. Subclasses name the cases callers
/// are expected to tell apart.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnknownMeasureError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class DimensionRangeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class MassSumError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

enum class Command { Estimate, Sweep, Oracle, BoundCheck, LemmaCheck };

std::string_view to_string(Command c) noexcept;
using rmprod::to_string;
Command parse_command(std::string_view name);

struct AtomSpec {
    double value = 0.0;
    mpq_class mass;
    friend bool operator==(const AtomSpec& a, const AtomSpec& b) { return a.value == b.value && a.mass == b.mass; }
};

struct SupportSpec {
    std::vector<double> entries; // row-major, k*k values
    mpq_class mass;
    friend bool operator==(const SupportSpec& a, const SupportSpec& b) {
        return a.entries == b.entries && a.mass == b.mass;
    }
};

/// Law of one entry. `type` is gaussian, uniform, rademacher or atomic.
/// mean/stddev and lo/hi parametrize the continuous law (the whole law for
/// gaussian/uniform, the continuous part for atomic).
struct EntrySpec {
    std::string type = "gaussian";
    double mean = 0.0;
    double stddev = 1.0;
    double lo = -1.0;
    double hi = 1.0;
    std::vector<AtomSpec> atoms;
    std::string continuous; // "", "gaussian" or "uniform"
    mpq_class continuous_weight = 0;
    friend bool operator==(const EntrySpec& a, const EntrySpec& b) {
        return a.type == b.type && a.mean == b.mean && a.stddev == b.stddev && a.lo == b.lo && a.hi == b.hi &&
               a.atoms == b.atoms && a.continuous == b.continuous && a.continuous_weight == b.continuous_weight;
    }
};

/// Law of one factor. `type` is one of the entry types (i.i.d. entries),
/// "rank-one" (p1 mixture with `entry` as the generic part) or "finite".
struct MeasureSpec {
    std::string type = "gaussian";
    EntrySpec entry;
    mpq_class p1 = 0;
    std::vector<SupportSpec> support;
    friend bool operator==(const MeasureSpec& a, const MeasureSpec& b) {
        return a.type == b.type && a.entry == b.entry && a.p1 == b.p1 && a.support == b.support;
    }
};

struct ExperimentConfig {
    Command command = Command::Estimate;
    int k = 2;
    std::vector<int> n{1};
    MeasureSpec measure;
    std::uint64_t trials = 100'000;
    std::optional<std::uint64_t> seed; // filled with a fresh value at execution when absent
    std::string policy = "fallback";   // float, exact or fallback
    double tau = kDefaultTau;
    double rank_tol = kDefaultRankTol;
    double confidence = 0.95;
    unsigned workers = 0;
    std::uint64_t budget = kDefaultEnumerationBudget;
    std::string route = "auto"; // exact oracle: auto, tuples or aggregate
    std::vector<std::string> outputs;
    std::string format; // overrides the extension of every output when set
    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
        return a.command == b.command && a.k == b.k && a.n == b.n && a.measure == b.measure &&
               a.trials == b.trials && a.seed == b.seed && a.policy == b.policy && a.tau == b.tau &&
               a.rank_tol == b.rank_tol && a.confidence == b.confidence && a.workers == b.workers &&
               a.budget == b.budget && a.route == b.route && a.outputs == b.outputs && a.format == b.format;
    }
};

/// "10", "1,2,4", "1..8" or mixtures such as "1..4,8,16".
std::vector<int> parse_n_list(std::string_view text);
/// "1:1/2,-1:1/2": value:mass pairs.
std::vector<AtomSpec> parse_atoms(std::string_view text);
/// "1,0,0,1@1/2;0,1,1,0@1/2": row-major entries, then the mass.
std::vector<SupportSpec> parse_support(std::string_view text);

/// Resets fields the measure type does not use, so equal laws compare equal.
void normalize(MeasureSpec& m);

/// Checks every field; throws the named ConfigError subclasses.
void validate(const ExperimentConfig& cfg);

MatrixMeasure build_measure(const MeasureSpec& spec, int k);
ClassifyPolicy build_policy(const ExperimentConfig& cfg);

Json to_json(const MeasureSpec& m);
MeasureSpec measure_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
/// Missing keys take defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path);

} // namespace rmprod::cli

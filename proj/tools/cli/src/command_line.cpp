#include "rmprod/cli/command_line.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "rmprod/cli/output.hpp"
#include "rmprod/cli/record.hpp"

namespace rmprod::cli {

namespace {

struct Flags {
    std::optional<std::string> config, k, n, measure, mean, stddev, lo, hi, atoms, continuous, continuous_weight, p1,
        generic, support, trials, seed, policy, tau, rank_tol, confidence, workers, budget, route, format;
    std::vector<std::string> out;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file; flags override its values");
    sub->add_option("--k", f.k, "matrix dimension, 1..8");
    sub->add_option("--n", f.n, "product length: 10, 1,2,4 or 1..8");
    sub->add_option("--measure", f.measure, "gaussian, uniform, rademacher, atomic, rank-one or finite");
    sub->add_option("--mean", f.mean, "gaussian mean");
    sub->add_option("--stddev", f.stddev, "gaussian standard deviation");
    sub->add_option("--lo", f.lo, "uniform lower end");
    sub->add_option("--hi", f.hi, "uniform upper end");
    sub->add_option("--atoms", f.atoms, "atoms as value:mass,... (masses exact, e.g. 1/4)");
    sub->add_option("--continuous", f.continuous, "continuous part of an atomic law: gaussian, uniform or none");
    sub->add_option("--continuous-weight", f.continuous_weight, "mass of the continuous part");
    sub->add_option("--p1", f.p1, "rank-one mixing probability");
    sub->add_option("--generic", f.generic, "entry law of the generic rank-one mixture component");
    sub->add_option("--support", f.support, "finite law as e11,e12,...@mass;...");
    sub->add_option("--trials", f.trials, "Monte Carlo trials (samples for lemma-check)");
    sub->add_option("--seed", f.seed, "64-bit seed; generated and recorded when absent");
    sub->add_option("--policy", f.policy, "float, exact or fallback");
    sub->add_option("--tau", f.tau, "relative discriminant band of the float classifier");
    sub->add_option("--rank-tol", f.rank_tol, "relative tolerance for rank <= 1 on float matrices");
    sub->add_option("--confidence", f.confidence, "confidence level of reported intervals");
    sub->add_option("--workers", f.workers, "worker threads, 0 = all cores");
    sub->add_option("--budget", f.budget, "cap on exact enumeration size");
    sub->add_option("--route", f.route, "exact oracle route: auto, tuples or aggregate");
    sub->add_option("--out", f.out, "output file (.json, .csv or .svg); repeatable");
    sub->add_option("--format", f.format, "force the output format: json, csv or svg");
}

template <class T>
T parse_integer(const std::string& s, const char* flag) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError(std::string(flag) + ": not a valid integer: '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const char* flag) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw ConfigError(std::string(flag) + ": not a valid number: '" + s + "'");
    return v;
}

mpq_class parse_q(const std::string& s, const char* flag) {
    try {
        return parse_rational(s);
    } catch (const DomainError&) {
        throw ConfigError(std::string(flag) + ": not a rational number: '" + s + "'");
    }
}

ExperimentConfig apply_flags(const Flags& f, Command command) {
    ExperimentConfig cfg = f.config ? load_config_file(*f.config) : ExperimentConfig{};
    cfg.command = command;
    if (f.k) cfg.k = parse_integer<int>(*f.k, "--k");
    if (f.n) cfg.n = parse_n_list(*f.n);

    MeasureSpec& m = cfg.measure;
    if (f.measure && *f.measure != m.type) {
        m = MeasureSpec{};
        m.type = *f.measure;
    }
    EntrySpec& e = m.entry;
    if (f.generic) e.type = *f.generic;
    if (f.mean) e.mean = parse_double(*f.mean, "--mean");
    if (f.stddev) e.stddev = parse_double(*f.stddev, "--stddev");
    if (f.lo) e.lo = parse_double(*f.lo, "--lo");
    if (f.hi) e.hi = parse_double(*f.hi, "--hi");
    if (f.atoms) e.atoms = parse_atoms(*f.atoms);
    if (f.continuous) e.continuous = *f.continuous == "none" ? "" : *f.continuous;
    if (f.continuous_weight) e.continuous_weight = parse_q(*f.continuous_weight, "--continuous-weight");
    if (f.p1) m.p1 = parse_q(*f.p1, "--p1");
    if (f.support) m.support = parse_support(*f.support);
    normalize(m);

    if (f.trials) cfg.trials = parse_integer<std::uint64_t>(*f.trials, "--trials");
    if (f.seed) cfg.seed = parse_integer<std::uint64_t>(*f.seed, "--seed");
    if (f.policy) cfg.policy = *f.policy;
    if (f.tau) cfg.tau = parse_double(*f.tau, "--tau");
    if (f.rank_tol) cfg.rank_tol = parse_double(*f.rank_tol, "--rank-tol");
    if (f.confidence) cfg.confidence = parse_double(*f.confidence, "--confidence");
    if (f.workers) cfg.workers = parse_integer<unsigned>(*f.workers, "--workers");
    if (f.budget) cfg.budget = parse_integer<std::uint64_t>(*f.budget, "--budget");
    if (f.route) cfg.route = *f.route;
    if (!f.out.empty()) cfg.outputs = f.out;
    if (f.format) cfg.format = *f.format;
    return cfg;
}

struct Parser {
    CLI::App app{"Real-spectrum probabilities of products of random matrices", "rmprod"};
    Flags flags;

    Parser() {
        app.require_subcommand(1);
        app.set_version_flag("--version", tool_version());
        const std::pair<const char*, const char*> commands[] = {
            {"estimate", "Monte Carlo estimate of P(all eigenvalues real) at one n"},
            {"sweep", "Monte Carlo estimates over a list of n"},
            {"oracle", "exact probability for integer-valued laws with finite support"},
            {"bound-check", "compare against 1 - (1 - p1)^n with p1 = P(rank <= 1)"},
            {"lemma-check", "2x2 exchangeable-rows discriminant check"},
        };
        for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);
    }

    ExperimentConfig parse(const std::vector<std::string>& args) {
        std::vector<const char*> argv{"rmprod"};
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
        return apply_flags(flags, parse_command(app.get_subcommands().front()->get_name()));
    }
};

void print_summary(const ResultRecord& rec, std::ostream& out) {
    for (const auto& r : rec.rows) {
        out << "n=" << r.n;
        if (r.estimate)
            out << " p_hat=" << r.estimate->p_hat << " ci=[" << r.estimate->ci_lo << ", " << r.estimate->ci_hi << "]"
                << " indeterminate=" << r.estimate->indeterminate;
        if (r.exact) out << " exact=" << to_string(*r.exact);
        if (r.bound) out << " bound=" << *r.bound;
        if (r.satisfied) out << (*r.satisfied ? " ok" : " VIOLATED");
        out << '\n';
    }
    out << "seed=" << rec.config.seed.value_or(0) << " elapsed=" << rec.elapsed_seconds << "s\n";
}

} // namespace

ExperimentConfig parse_args(const std::vector<std::string>& args) {
    Parser p;
    ExperimentConfig cfg;
    try {
        cfg = p.parse(args);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    validate(cfg);
    return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Parser p;
    try {
        const ResultRecord rec = execute(p.parse(args));
        if (rec.config.outputs.empty()) {
            out << record_to_json(rec).dump(2) << '\n';
        } else {
            emit_outputs(rec);
            print_summary(rec, out);
        }
        if (rec.exit_code() == kExitBoundViolated) err << "bound check failed\n";
        return rec.exit_code();
    } catch (const CLI::ParseError& e) {
        const int code = p.app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitBadInput;
    } catch (const BudgetExceeded& e) {
        err << "error: " << e.what() << '\n';
        return kExitBudgetExceeded;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
}

} // namespace rmprod::cli

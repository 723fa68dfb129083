#include "rmprod/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace rmprod::cli {

namespace {

const std::vector<std::string_view> kEntryTypes = {"gaussian", "uniform", "rademacher", "atomic"};

bool is_entry_type(std::string_view t) {
    return std::find(kEntryTypes.begin(), kEntryTypes.end(), t) != kEntryTypes.end();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

int parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("not an integer: '" + std::string(s) + "'");
    return v;
}

mpq_class parse_mass(std::string_view s) {
    try {
        return parse_rational(s);
    } catch (const DomainError&) {
        throw ConfigError("not a rational number: '" + std::string(s) + "'");
    }
}

// Atom values and matrix entries: rationals are accepted and rounded.
double parse_real(std::string_view s) {
    const double v = parse_mass(s).get_d();
    if (!std::isfinite(v)) throw ConfigError("value out of range: '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string_view to_string(Command c) noexcept {
    switch (c) {
    case Command::Estimate: return "estimate";
    case Command::Sweep: return "sweep";
    case Command::Oracle: return "oracle";
    case Command::BoundCheck: return "bound-check";
    case Command::LemmaCheck: return "lemma-check";
    }
    return "?";
}

Command parse_command(std::string_view name) {
    for (Command c : {Command::Estimate, Command::Sweep, Command::Oracle, Command::BoundCheck, Command::LemmaCheck})
        if (to_string(c) == name) return c;
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::vector<int> parse_n_list(std::string_view text) {
    std::vector<int> out;
    for (std::string_view part : split(text, ',')) {
        if (part.empty()) throw ConfigError("empty item in n list '" + std::string(text) + "'");
        const std::size_t dots = part.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_int(part));
            continue;
        }
        const int a = parse_int(trim(part.substr(0, dots)));
        const int b = parse_int(trim(part.substr(dots + 2)));
        if (b < a) throw ConfigError("descending range '" + std::string(part) + "'");
        if (static_cast<long>(b) - a > 1'000'000) throw ConfigError("range too long: '" + std::string(part) + "'");
        for (int v = a; v <= b; ++v) out.push_back(v);
    }
    return out;
}

std::vector<AtomSpec> parse_atoms(std::string_view text) {
    std::vector<AtomSpec> out;
    for (std::string_view item : split(text, ',')) {
        const std::size_t colon = item.find(':');
        if (colon == std::string_view::npos)
            throw ConfigError("atom '" + std::string(item) + "' is not value:mass");
        out.push_back({parse_real(trim(item.substr(0, colon))), parse_mass(trim(item.substr(colon + 1)))});
    }
    return out;
}

std::vector<SupportSpec> parse_support(std::string_view text) {
    std::vector<SupportSpec> out;
    for (std::string_view item : split(text, ';')) {
        const std::size_t at = item.find('@');
        if (at == std::string_view::npos)
            throw ConfigError("support point '" + std::string(item) + "' is not entries@mass");
        SupportSpec p;
        for (std::string_view e : split(item.substr(0, at), ',')) p.entries.push_back(parse_real(e));
        p.mass = parse_mass(trim(item.substr(at + 1)));
        out.push_back(std::move(p));
    }
    return out;
}

void normalize(MeasureSpec& m) {
    const EntrySpec defaults;
    auto normalize_entry = [&](EntrySpec& e) {
        if (e.type == "rademacher") {
            e = EntrySpec{};
            e.type = "rademacher";
            return;
        }
        std::string cont = e.type == "atomic" ? e.continuous : e.type;
        if (cont != "gaussian") {
            e.mean = defaults.mean;
            e.stddev = defaults.stddev;
        }
        if (cont != "uniform") {
            e.lo = defaults.lo;
            e.hi = defaults.hi;
        }
        // An atomic weight without a continuous part is kept so validation
        // can report it.
        if (e.type != "atomic") {
            e.atoms.clear();
            e.continuous.clear();
            e.continuous_weight = 0;
        }
    };
    if (is_entry_type(m.type)) {
        m.entry.type = m.type;
        normalize_entry(m.entry);
        m.p1 = 0;
        m.support.clear();
    } else if (m.type == "rank-one") {
        normalize_entry(m.entry);
        m.support.clear();
    } else if (m.type == "finite") {
        m.entry = EntrySpec{};
        m.p1 = 0;
    }
    for (auto& a : m.entry.atoms) a.mass.canonicalize();
    for (auto& p : m.support) p.mass.canonicalize();
    m.p1.canonicalize();
    m.entry.continuous_weight.canonicalize();
}

namespace {

void validate_entry(const EntrySpec& e, const std::string& where) {
    if (!is_entry_type(e.type)) throw UnknownMeasureError("unknown entry measure '" + e.type + "' in " + where);
    const std::string cont = e.type == "atomic" ? e.continuous : e.type;
    if (e.type == "atomic" && !cont.empty() && cont != "gaussian" && cont != "uniform")
        throw UnknownMeasureError("unknown continuous part '" + cont + "' in " + where);
    if (cont == "gaussian" && !(e.stddev > 0.0 && std::isfinite(e.stddev) && std::isfinite(e.mean)))
        throw ConfigError("gaussian needs a finite mean and stddev > 0");
    if (cont == "uniform" && !(e.lo < e.hi && std::isfinite(e.lo) && std::isfinite(e.hi)))
        throw ConfigError("uniform needs finite lo < hi");
    if (e.type != "atomic") return;
    if (e.atoms.empty()) throw ConfigError("atomic measure needs at least one atom");
    mpq_class sum = e.continuous_weight;
    std::set<double> seen;
    for (const auto& a : e.atoms) {
        if (a.mass <= 0) throw MassSumError("atom masses must be positive");
        if (!seen.insert(a.value).second) throw ConfigError("duplicate atom value");
        sum += a.mass;
    }
    if (e.continuous_weight < 0) throw MassSumError("continuous weight must be non-negative");
    if (e.continuous.empty() && e.continuous_weight != 0)
        throw MassSumError("continuous weight given without a continuous part");
    if (!e.continuous.empty() && e.continuous_weight == 0)
        throw MassSumError("continuous part given with zero weight");
    if (sum != 1) throw MassSumError("mass sum != 1 (atoms + continuous weight = " + to_string(sum) + ")");
}

} // namespace

void validate(const ExperimentConfig& cfg) {
    if (cfg.k < 1 || cfg.k > kMaxDim)
        throw DimensionRangeError("k = " + std::to_string(cfg.k) + " out of range [1, " + std::to_string(kMaxDim) + "]");
    const MeasureSpec& m = cfg.measure;
    if (is_entry_type(m.type)) {
        validate_entry(m.entry, "measure");
    } else if (m.type == "rank-one") {
        if (!(m.p1 > 0 && m.p1 <= 1)) throw ConfigError("rank-one mixture needs 0 < p1 <= 1");
        validate_entry(m.entry, "rank-one generic part");
    } else if (m.type == "finite") {
        if (m.support.empty()) throw ConfigError("finite measure needs at least one support point");
        mpq_class sum = 0;
        for (const auto& p : m.support) {
            if (p.entries.size() != static_cast<std::size_t>(cfg.k * cfg.k))
                throw DimensionRangeError("support matrix has " + std::to_string(p.entries.size()) +
                                          " entries, k*k = " + std::to_string(cfg.k * cfg.k));
            if (p.mass <= 0) throw MassSumError("support masses must be positive");
            sum += p.mass;
        }
        if (sum != 1) throw MassSumError("mass sum != 1 (support masses = " + to_string(sum) + ")");
    } else {
        throw UnknownMeasureError("unknown measure '" + m.type + "'");
    }

    if (cfg.n.empty()) throw ConfigError("n list is empty");
    for (std::size_t i = 0; i < cfg.n.size(); ++i) {
        if (cfg.n[i] < 1) throw ConfigError("n must be >= 1");
        if (i > 0 && cfg.n[i] <= cfg.n[i - 1]) throw ConfigError("n values must be strictly increasing");
    }
    if (cfg.command == Command::Estimate && cfg.n.size() != 1)
        throw ConfigError("estimate takes a single n; use sweep for a list");
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    if (cfg.policy != "float" && cfg.policy != "exact" && cfg.policy != "fallback")
        throw ConfigError("policy must be float, exact or fallback");
    if (!(cfg.tau > 0.0 && std::isfinite(cfg.tau))) throw ConfigError("tau must be positive");
    if (!(cfg.rank_tol > 0.0 && std::isfinite(cfg.rank_tol))) throw ConfigError("rank-tol must be positive");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) throw ConfigError("confidence must lie in (0, 1)");
    if (cfg.budget < 1) throw ConfigError("budget must be >= 1");
    if (cfg.route != "auto" && cfg.route != "tuples" && cfg.route != "aggregate")
        throw ConfigError("route must be auto, tuples or aggregate");
    if (!cfg.format.empty() && cfg.format != "json" && cfg.format != "csv" && cfg.format != "svg")
        throw ConfigError("format must be json, csv or svg");
    for (const auto& out : cfg.outputs) {
        if (out.empty()) throw ConfigError("empty output path");
        if (!cfg.format.empty()) continue;
        const std::string ext = std::filesystem::path(out).extension().string();
        if (ext != ".json" && ext != ".csv" && ext != ".svg")
            throw ConfigError("cannot tell the format of '" + out + "'; use .json, .csv, .svg or --format");
    }
    if (cfg.command == Command::LemmaCheck && cfg.k != 2)
        throw DimensionRangeError("lemma-check is defined for k = 2 only");

    const MatrixMeasure built = build_measure(m, cfg.k);
    if (cfg.command == Command::Oracle && !built.is_integer_valued())
        throw ConfigError("oracle needs an integer-valued measure with finite support");
}

namespace {

EntryMeasure build_entry(const EntrySpec& e) {
    if (e.type == "gaussian") return EntryMeasure::gaussian(e.mean, e.stddev);
    if (e.type == "uniform") return EntryMeasure::uniform(e.lo, e.hi);
    if (e.type == "rademacher") return EntryMeasure::rademacher();
    std::vector<Atom> atoms;
    for (const auto& a : e.atoms) atoms.push_back({a.value, a.mass});
    std::optional<EntryMeasure::Continuous> cont;
    if (e.continuous == "gaussian") cont = Gaussian{e.mean, e.stddev};
    if (e.continuous == "uniform") cont = Uniform{e.lo, e.hi};
    return EntryMeasure::atomic(std::move(atoms), cont, e.continuous_weight);
}

} // namespace

MatrixMeasure build_measure(const MeasureSpec& spec, int k) {
    try {
        if (is_entry_type(spec.type)) return MatrixMeasure::iid(build_entry(spec.entry), k);
        if (spec.type == "rank-one") return MatrixMeasure::rank_one_mixture(spec.p1, build_entry(spec.entry), k);
        if (spec.type == "finite") {
            std::vector<SupportPoint> pts;
            for (const auto& p : spec.support) {
                if (p.entries.size() != static_cast<std::size_t>(k * k))
                    throw DimensionRangeError("support matrix does not have k*k entries");
                pts.push_back({SquareMatrix(k, std::span<const double>(p.entries)), p.mass});
            }
            return MatrixMeasure::finite_support(std::move(pts));
        }
    } catch (const MassError& e) {
        throw MassSumError(e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const DimensionError& e) {
        throw DimensionRangeError(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    throw UnknownMeasureError("unknown measure '" + spec.type + "'");
}

ClassifyPolicy build_policy(const ExperimentConfig& cfg) {
    if (cfg.policy == "float") return ClassifyPolicy::float_only(cfg.tau);
    if (cfg.policy == "exact") return {ClassifyPolicy::Mode::ExactOnly, cfg.tau};
    return ClassifyPolicy::with_fallback(cfg.tau);
}

namespace {

Json entry_to_json(const EntrySpec& e) {
    Json j;
    j["type"] = e.type;
    auto continuous_params = [](Json& out, const std::string& type, const EntrySpec& e) {
        if (type == "gaussian") {
            out["mean"] = e.mean;
            out["stddev"] = e.stddev;
        } else if (type == "uniform") {
            out["lo"] = e.lo;
            out["hi"] = e.hi;
        }
    };
    if (e.type == "atomic") {
        Json atoms = Json::array();
        for (const auto& a : e.atoms) atoms.push_back({{"value", a.value}, {"mass", to_string(a.mass)}});
        j["atoms"] = atoms;
        if (!e.continuous.empty()) {
            Json c;
            c["type"] = e.continuous;
            continuous_params(c, e.continuous, e);
            j["continuous"] = c;
            j["continuous_weight"] = to_string(e.continuous_weight);
        }
    } else {
        continuous_params(j, e.type, e);
    }
    return j;
}

void reject_unknown_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("wrong type for '") + key + "'");
    }
}

mpq_class rational_from_json(const Json& j, const char* what) {
    if (j.is_string()) return parse_mass(j.get<std::string>());
    if (j.is_number_integer()) return mpq_class(j.get<long>());
    if (j.is_number_float()) return mpq_class(j.get<double>()); // exact binary value
    throw ConfigError(std::string("'") + what + "' must be a rational string such as \"1/4\"");
}

EntrySpec entry_from_json(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(j, {"type", "mean", "stddev", "lo", "hi", "atoms", "continuous", "continuous_weight"}, where);
    EntrySpec e;
    e.type = get_or<std::string>(j, "type", e.type);
    e.mean = get_or<double>(j, "mean", e.mean);
    e.stddev = get_or<double>(j, "stddev", e.stddev);
    e.lo = get_or<double>(j, "lo", e.lo);
    e.hi = get_or<double>(j, "hi", e.hi);
    if (j.contains("atoms")) {
        if (!j["atoms"].is_array()) throw ConfigError("'atoms' must be an array");
        for (const auto& a : j["atoms"]) {
            if (!a.is_object() || !a.contains("value") || !a.contains("mass"))
                throw ConfigError("each atom needs 'value' and 'mass'");
            reject_unknown_keys(a, {"value", "mass"}, "atom");
            e.atoms.push_back({get_or<double>(a, "value", 0.0), rational_from_json(a["mass"], "mass")});
        }
    }
    if (j.contains("continuous")) {
        const Json& c = j["continuous"];
        if (c.is_string()) {
            e.continuous = c.get<std::string>();
        } else if (c.is_object()) {
            reject_unknown_keys(c, {"type", "mean", "stddev", "lo", "hi"}, "continuous part");
            e.continuous = get_or<std::string>(c, "type", "");
            e.mean = get_or<double>(c, "mean", e.mean);
            e.stddev = get_or<double>(c, "stddev", e.stddev);
            e.lo = get_or<double>(c, "lo", e.lo);
            e.hi = get_or<double>(c, "hi", e.hi);
        } else if (!c.is_null()) {
            throw ConfigError("'continuous' must be an object");
        }
    }
    if (j.contains("continuous_weight")) e.continuous_weight = rational_from_json(j["continuous_weight"], "continuous_weight");
    return e;
}

} // namespace

Json to_json(const MeasureSpec& m) {
    if (is_entry_type(m.type)) return entry_to_json(m.entry);
    Json j;
    j["type"] = m.type;
    if (m.type == "rank-one") {
        j["p1"] = to_string(m.p1);
        j["generic"] = entry_to_json(m.entry);
    } else if (m.type == "finite") {
        Json pts = Json::array();
        for (const auto& p : m.support) {
            const auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(p.entries.size()))));
            Json rows = Json::array();
            for (std::size_t r = 0; r < k; ++r) {
                Json row = Json::array();
                for (std::size_t c = 0; c < k && r * k + c < p.entries.size(); ++c) row.push_back(p.entries[r * k + c]);
                rows.push_back(row);
            }
            pts.push_back({{"matrix", rows}, {"mass", to_string(p.mass)}});
        }
        j["support"] = pts;
    }
    return j;
}

MeasureSpec measure_from_json(const Json& j) {
    if (j.is_string()) {
        MeasureSpec m;
        m.type = j.get<std::string>();
        normalize(m);
        return m;
    }
    if (!j.is_object()) throw ConfigError("'measure' must be an object");
    MeasureSpec m;
    m.type = get_or<std::string>(j, "type", "");
    if (m.type.empty()) throw UnknownMeasureError("measure has no 'type'");
    if (is_entry_type(m.type)) {
        m.entry = entry_from_json(j, "measure");
    } else if (m.type == "rank-one") {
        reject_unknown_keys(j, {"type", "p1", "generic"}, "rank-one measure");
        if (!j.contains("p1")) throw ConfigError("rank-one measure needs 'p1'");
        m.p1 = rational_from_json(j["p1"], "p1");
        if (j.contains("generic")) m.entry = entry_from_json(j["generic"], "generic part");
    } else if (m.type == "finite") {
        reject_unknown_keys(j, {"type", "support"}, "finite measure");
        if (!j.contains("support") || !j["support"].is_array()) throw ConfigError("finite measure needs a 'support' array");
        for (const auto& p : j["support"]) {
            if (!p.is_object() || !p.contains("matrix") || !p.contains("mass"))
                throw ConfigError("each support point needs 'matrix' and 'mass'");
            reject_unknown_keys(p, {"matrix", "mass"}, "support point");
            SupportSpec s;
            try {
                for (const auto& row : p["matrix"])
                    for (const auto& x : row) s.entries.push_back(x.get<double>());
            } catch (const Json::exception&) {
                throw ConfigError("support 'matrix' must be an array of numeric rows");
            }
            s.mass = rational_from_json(p["mass"], "mass");
            m.support.push_back(std::move(s));
        }
    } else {
        throw UnknownMeasureError("unknown measure '" + m.type + "'");
    }
    normalize(m);
    return m;
}

Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["command"] = to_string(cfg.command);
    j["k"] = cfg.k;
    j["n"] = cfg.n;
    j["measure"] = to_json(cfg.measure);
    j["trials"] = cfg.trials;
    if (cfg.seed) j["seed"] = *cfg.seed;
    j["policy"] = cfg.policy;
    j["tau"] = cfg.tau;
    j["rank_tol"] = cfg.rank_tol;
    j["confidence"] = cfg.confidence;
    j["workers"] = cfg.workers;
    j["budget"] = cfg.budget;
    j["route"] = cfg.route;
    j["outputs"] = cfg.outputs;
    if (!cfg.format.empty()) j["format"] = cfg.format;
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(j,
                        {"command", "k", "n", "measure", "trials", "seed", "policy", "tau", "rank_tol", "confidence",
                         "workers", "budget", "route", "outputs", "format"},
                        "config");
    ExperimentConfig cfg;
    if (j.contains("command")) cfg.command = parse_command(get_or<std::string>(j, "command", ""));
    cfg.k = get_or<int>(j, "k", cfg.k);
    if (j.contains("n")) {
        const Json& n = j["n"];
        if (n.is_number_integer()) cfg.n = {n.get<int>()};
        else if (n.is_string()) cfg.n = parse_n_list(n.get<std::string>());
        else cfg.n = get_or<std::vector<int>>(j, "n", {});
    }
    if (j.contains("measure")) cfg.measure = measure_from_json(j["measure"]);
    cfg.trials = get_or<std::uint64_t>(j, "trials", cfg.trials);
    if (j.contains("seed") && !j["seed"].is_null()) cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.policy = get_or<std::string>(j, "policy", cfg.policy);
    cfg.tau = get_or<double>(j, "tau", cfg.tau);
    cfg.rank_tol = get_or<double>(j, "rank_tol", cfg.rank_tol);
    cfg.confidence = get_or<double>(j, "confidence", cfg.confidence);
    cfg.workers = get_or<unsigned>(j, "workers", cfg.workers);
    cfg.budget = get_or<std::uint64_t>(j, "budget", cfg.budget);
    cfg.route = get_or<std::string>(j, "route", cfg.route);
    if (j.contains("outputs")) {
        if (j["outputs"].is_string()) cfg.outputs = {j["outputs"].get<std::string>()};
        else cfg.outputs = get_or<std::vector<std::string>>(j, "outputs", {});
    }
    cfg.format = get_or<std::string>(j, "format", "");
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

} // namespace rmprod::cli

#include "rmprod/cli/output.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rmprod::cli {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json optional_rational(const std::optional<mpq_class>& q) { return q ? Json(to_string(*q)) : Json(nullptr); }

Json lemma_to_json(const LemmaRow& l) {
    Json j;
    const LemmaReport& s = l.sampled;
    j["samples"] = s.samples;
    j["d1_nonneg"] = s.d1_nonneg;
    j["d2_nonneg"] = s.d2_nonneg;
    j["either_nonneg"] = s.either_nonneg;
    j["confidence"] = s.confidence;
    j["d1_ci"] = {s.d1_ci.first, s.d1_ci.second};
    j["d2_ci"] = {s.d2_ci.first, s.d2_ci.second};
    j["cis_overlap"] = s.cis_overlap;
    j["sure_event_holds"] = s.sure_event_holds;
    j["half_not_rejected"] = s.half_not_rejected;
    if (l.exact) {
        j["exact_p_d1_nonneg"] = to_string(l.exact->p_d1_nonneg);
        j["exact_p_d2_nonneg"] = to_string(l.exact->p_d2_nonneg);
        j["exact_p_either_nonneg"] = to_string(l.exact->p_either_nonneg);
    }
    return j;
}

Json row_to_json(const ResultRow& r) {
    Json j;
    j["n"] = r.n;
    if (r.estimate) {
        const EstimateResult& e = *r.estimate;
        j["trials"] = e.trials;
        j["all_real"] = e.all_real;
        j["complex_pair"] = e.complex_pair;
        j["indeterminate"] = e.indeterminate;
        j["p_hat"] = e.p_hat;
        j["ci_lo"] = e.ci_lo;
        j["ci_hi"] = e.ci_hi;
        j["p_hat_upper"] = e.p_hat_upper;
        j["confidence"] = e.confidence;
        // Empirical convergence column; no rate is asserted.
        j["log_one_minus_p_hat"] = e.p_hat < 1.0 ? Json(std::log1p(-e.p_hat)) : Json(nullptr);
        j["max_abs_log_scale"] = e.max_abs_log_scale;
    } else {
        for (const char* key : {"trials", "all_real", "complex_pair", "indeterminate", "p_hat", "ci_lo", "ci_hi",
                                "p_hat_upper", "confidence", "log_one_minus_p_hat", "max_abs_log_scale"})
            j[key] = nullptr;
    }
    j["exact"] = optional_rational(r.exact);
    j["exact_num"] = r.exact ? Json(r.exact->get_num().get_str()) : Json(nullptr);
    j["exact_den"] = r.exact ? Json(r.exact->get_den().get_str()) : Json(nullptr);
    j["route"] = r.route.empty() ? Json(nullptr) : Json(r.route);
    j["bound"] = optional_number(r.bound);
    j["bound_exact"] = optional_rational(r.bound_exact);
    j["satisfied"] = r.satisfied ? Json(*r.satisfied) : Json(nullptr);
    j["margin"] = optional_number(r.margin);
    if (r.lemma) j["lemma"] = lemma_to_json(*r.lemma);
    return j;
}

// CSV cells reuse the JSON text of the same value so both files agree
// digit for digit; strings are written bare, null as an empty cell.
std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

} // namespace

Json record_to_json(const ResultRecord& rec) {
    Json j;
    j["tool"] = "rmprod";
    j["version"] = rec.version;
    j["timestamp"] = rec.timestamp;
    j["elapsed_seconds"] = rec.elapsed_seconds;
    j["command"] = to_string(rec.config.command);
    j["seed"] = rec.config.seed.value_or(0);
    j["config"] = to_json(rec.config);
    if (rec.p1) {
        j["rank_one_mass"] = {{"value", rec.p1->value},
                              {"exact", optional_rational(rec.p1->exact)},
                              {"source", rec.p1->source}};
    } else {
        j["rank_one_mass"] = nullptr;
    }
    j["passed"] = rec.passed ? Json(*rec.passed) : Json(nullptr);
    Json rows = Json::array();
    for (const auto& r : rec.rows) rows.push_back(row_to_json(r));
    j["rows"] = rows;
    return j;
}

std::string record_to_csv(const ResultRecord& rec) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rec.rows) {
        const Json j = row_to_json(r);
        bool first = true;
        for (const char* key : {"n", "trials", "all_real", "complex_pair", "indeterminate", "p_hat", "ci_lo", "ci_hi",
                                "bound", "exact_num", "exact_den"}) {
            if (!first) out += ',';
            out += cell(j[key]);
            first = false;
        }
        out += '\n';
    }
    return out;
}

namespace {

struct Point {
    double n;
    double y;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

} // namespace

std::string record_to_svg(const ResultRecord& rec) {
    constexpr double width = 720, height = 480, left = 70, right = 150, top = 30, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double n_min = 1e300, n_max = -1e300;
    for (const auto& r : rec.rows) {
        n_min = std::min(n_min, static_cast<double>(r.n));
        n_max = std::max(n_max, static_cast<double>(r.n));
    }
    if (rec.rows.empty()) n_min = n_max = 1;
    const bool log_x = n_min >= 1 && n_max / n_min >= 8;
    auto xmap = [&](double n) {
        if (n_max == n_min) return left + plot_w / 2;
        const double t = log_x ? std::log2(n / n_min) / std::log2(n_max / n_min) : (n - n_min) / (n_max - n_min);
        return left + t * plot_w;
    };
    auto ymap = [&](double p) { return top + (1.0 - std::clamp(p, 0.0, 1.0)) * plot_h; };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<title>P(all eigenvalues real) vs n, k = " << rec.config.k << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    // axes and y ticks
    s << "<g stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\"" << top + plot_h
      << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "</g>\n";
    for (int i = 0; i <= 4; ++i) {
        const double p = i / 4.0;
        s << "<text x=\"" << left - 8 << "\" y=\"" << fmt(ymap(p) + 4) << "\" text-anchor=\"end\">" << fmt(p)
          << "</text>\n";
    }
    for (const auto& r : rec.rows)
        s << "<text x=\"" << fmt(xmap(r.n)) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">" << r.n
          << "</text>\n";
    s << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">n"
      << (log_x ? " (log scale)" : "") << "</text>\n"
      << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">probability</text>\n";

    int legend_row = 0;
    auto legend = [&](const std::string& color, const std::string& label, const char* dash) {
        const double y = top + 10 + 18 * legend_row++;
        s << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << y << "\" x2=\"" << left + plot_w + 40 << "\" y2=\""
          << y << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n"
          << "<text x=\"" << left + plot_w + 45 << "\" y=\"" << y + 4 << "\">" << label << "</text>\n";
    };
    auto polyline = [&](const std::vector<Point>& pts, const std::string& color, const char* dash,
                        const std::string& id) {
        s << "<polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash
          << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            s << (i ? " " : "") << fmt(xmap(pts[i].n)) << ',' << fmt(ymap(pts[i].y));
        s << "\"/>\n";
        for (const auto& p : pts)
            s << "<circle cx=\"" << fmt(xmap(p.n)) << "\" cy=\"" << fmt(ymap(p.y)) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
    };

    if (rec.config.k == 2) {
        s << "<line id=\"half\" x1=\"" << left << "\" y1=\"" << fmt(ymap(0.5)) << "\" x2=\"" << left + plot_w
          << "\" y2=\"" << fmt(ymap(0.5)) << "\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n";
        legend("gray", "y = 1/2", " stroke-dasharray=\"2,3\"");
    }

    std::vector<Point> est, exact, bound;
    for (const auto& r : rec.rows) {
        if (r.estimate) est.push_back({static_cast<double>(r.n), r.estimate->p_hat});
        if (r.exact) exact.push_back({static_cast<double>(r.n), r.exact->get_d()});
        if (r.bound && rec.config.command != Command::LemmaCheck) bound.push_back({static_cast<double>(r.n), *r.bound});
    }
    if (!bound.empty()) {
        polyline(bound, "firebrick", " stroke-dasharray=\"6,4\"", "bound");
        legend("firebrick", "lower bound", " stroke-dasharray=\"6,4\"");
    }
    if (!exact.empty()) {
        polyline(exact, "seagreen", "", "exact");
        legend("seagreen", "exact", "");
    }
    if (!est.empty()) {
        s << "<g id=\"whiskers\" stroke=\"steelblue\">\n";
        for (const auto& r : rec.rows) {
            if (!r.estimate) continue;
            const double x = xmap(r.n);
            s << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(ymap(r.estimate->ci_lo)) << "\" x2=\"" << fmt(x)
              << "\" y2=\"" << fmt(ymap(r.estimate->ci_hi)) << "\"/>\n";
        }
        s << "</g>\n";
        polyline(est, "steelblue", "", "p_hat");
        legend("steelblue", "estimate", "");
    }
    s << "</svg>\n";
    return s.str();
}

std::string output_format(const std::filesystem::path& path, std::string_view override_format) {
    if (!override_format.empty()) return std::string(override_format);
    std::string ext = path.extension().string();
    if (!ext.empty()) ext.erase(0, 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "json" || ext == "csv" || ext == "svg") return ext;
    throw ConfigError("cannot tell the format of '" + path.string() + "'; use .json, .csv, .svg or --format");
}

std::filesystem::path resolve_output_path(const std::filesystem::path& path) {
    if (path.is_absolute()) return path;
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0')
        return std::filesystem::path(dir) / path;
    return path;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    static std::atomic<unsigned> counter{0};
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::filesystem::path tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw OutputError("cannot write '" + path.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp, ec);
            throw OutputError("write failed for '" + path.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw OutputError("cannot move output into place at '" + path.string() + "'");
    }
}

std::vector<std::filesystem::path> emit_outputs(const ResultRecord& rec) {
    std::vector<std::filesystem::path> written;
    for (const auto& name : rec.config.outputs) {
        const std::filesystem::path path = resolve_output_path(name);
        const std::string format = output_format(path, rec.config.format);
        if (format == "json") write_file_atomic(path, record_to_json(rec).dump(2) + "\n");
        else if (format == "csv") write_file_atomic(path, record_to_csv(rec));
        else write_file_atomic(path, record_to_svg(rec));
        written.push_back(path);
    }
    return written;
}

} // namespace rmprod::cli

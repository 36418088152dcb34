#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bbt/calibration.hpp"
#include "bbt/convergence.hpp"
#include "bbt/freq.hpp"
#include "bbt/mle.hpp"
#include "bbt/model_checks.hpp"
#include "bbt/summary.hpp"
#include "bbt/wintable.hpp"

// Reports are built as JSON first; markdown and CSV are rendered from the
// JSON so they never show a number the JSON lacks.
namespace bbt {

using Json = nlohmann::ordered_json;

enum class Format { markdown, csv, json };

inline Format parse_format(std::string_view s) {
    if (s == "markdown" || s == "md") return Format::markdown;
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ConfigError("unknown format '" + std::string(s) + "' (markdown, csv, json)");
}

namespace detail {

inline std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string fixed(const Json& v, int digits = 2) {
    if (v.is_null()) return "NA";
    return fixed(v.get<double>(), digits);
}

inline std::string md_row(const std::vector<std::string>& cells) {
    std::string s = "|";
    for (const auto& c : cells) s += " " + c + " |";
    return s + "\n";
}

inline std::string md_header(const std::vector<std::string>& cells) {
    std::string s = md_row(cells) + "|";
    for (std::size_t i = 0; i < cells.size(); ++i) s += "---|";
    return s + "\n";
}

inline std::string csv_field(const Json& v) {
    if (v.is_null()) return "NA";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    return format_double(v.get<double>());
}

// CSV of an array of flat objects, columns from the first object.
inline std::string csv_table(const Json& rows) {
    if (!rows.is_array() || rows.empty()) return "";
    std::string out;
    bool first = true;
    for (const auto& [key, _] : rows.front().items()) {
        out += (first ? "" : ",") + key;
        first = false;
    }
    out += '\n';
    for (const auto& r : rows) {
        first = true;
        for (const auto& [key, _] : rows.front().items()) {
            out += (first ? "" : ",") + csv_field(r.contains(key) ? r[key] : Json());
            first = false;
        }
        out += '\n';
    }
    return out;
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

} // namespace detail

inline Json to_json(const WinTable& wt) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < wt.size(); ++i)
        for (std::size_t j = i + 1; j < wt.size(); ++j)
            rows.push_back({{"alg_i", wt.algorithms()[i]},
                            {"alg_j", wt.algorithms()[j]},
                            {"n", wt.n(i, j)},
                            {"wins_i", wt.wins(i, j)},
                            {"wins_j", wt.wins(j, i)},
                            {"ties", wt.ties(i, j)}});
    return rows;
}

inline Json to_json(const ComparisonSummary& s) {
    Json ranking = Json::array();
    for (std::size_t p = 0; p < s.ranking.order.size(); ++p)
        ranking.push_back({{"algorithm", s.ranking.names[p]},
                           {"mean_beta", s.ranking.mean_beta[s.ranking.order[p]]},
                           {"near_tie_with_next", static_cast<bool>(s.ranking.near_tie_with_next[p])}});
    Json rows = Json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"first", r.first_name},
                        {"second", r.second_name},
                        {"mean", r.mean},
                        {"median", r.median},
                        {"hdi_low", r.hdi_low},
                        {"hdi_high", r.hdi_high},
                        {"delta", r.delta},
                        {"above_50", r.above_50},
                        {"in_rope", r.in_rope},
                        {"min", r.min},
                        {"max", r.max},
                        {"flagged", r.flagged}});
    return {{"hdi_mass", s.hdi_mass},
            {"rope", {{"low", s.rope.low}, {"high", s.rope.high}}},
            {"ranking", ranking},
            {"rows", rows}};
}

inline Json to_json(const ConvergenceReport& c, const PosteriorDraws& draws) {
    Json params = Json::array();
    for (const auto& p : c.parameters)
        params.push_back({{"name", p.name}, {"rhat", detail::optional_json(p.rhat)}, {"ess", p.ess}});
    Json chains = Json::array();
    for (std::size_t i = 0; i < draws.stats.size(); ++i) {
        const auto& s = draws.stats[i];
        chains.push_back({{"chain", i},
                          {"step_size", s.step_size},
                          {"mean_accept", s.mean_accept},
                          {"mean_leapfrog", s.mean_leapfrog},
                          {"divergences", s.divergences},
                          {"max_depth_hits", s.max_depth_hits}});
    }
    return {{"verdict", c.pass ? "pass" : "fail"},
            {"max_rhat", detail::optional_json(c.max_rhat)},
            {"min_ess", c.min_ess},
            {"divergences", c.divergences},
            {"max_depth_hits", c.max_depth_hits},
            {"problems", c.problems},
            {"parameters", params},
            {"chains", chains}};
}

inline Json to_json(const PpcCoverage& cov) {
    Json rows = Json::array();
    for (const auto& r : cov.rows) {
        Json row = {{"mass", r.mass}, {"wins", r.wins}};
        if (r.ties) row["ties"] = *r.ties;
        rows.push_back(row);
    }
    return {{"pairs", cov.pairs}, {"rows", rows}};
}

inline Json to_json(const WaicResult& w) {
    return {{"waic", w.waic}, {"lppd", w.lppd}, {"p_waic", w.p_waic}, {"units", w.units}, {"unit", w.unit}};
}

inline Json to_json(const MleResult& m) {
    Json weights = Json::array();
    for (std::size_t i = 0; i < m.weights.size(); ++i)
        weights.push_back({{"algorithm", m.algorithms[i]}, {"weight", m.weights[i]}});
    Json pairs = Json::array();
    for (std::size_t i = 0; i < m.weights.size(); ++i)
        for (std::size_t j = i + 1; j < m.weights.size(); ++j)
            pairs.push_back({{"first", m.algorithms[i]}, {"second", m.algorithms[j]}, {"prob", m.prob(i, j)}});
    return {{"converged", m.converged},
            {"iterations", m.iterations},
            {"log_likelihood", m.log_likelihood},
            {"weights", weights},
            {"pairs", pairs}};
}

inline Json to_json(const FreqReport& r) {
    Json ordering = Json::array();
    for (std::size_t i = 0; i < r.ordering.size(); ++i)
        ordering.push_back({{"algorithm", r.ordering[i]}, {"value", r.ordering_values[i]}});
    Json pairs = Json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"first", p.first_name},
                         {"second", p.second_name},
                         {"statistic", p.statistic},
                         {"p_raw", detail::optional_json(p.p_raw)},
                         {"p_adjusted", detail::optional_json(p.p_adjusted)},
                         {"significant", p.significant}});
    return {{"procedure", r.procedure},
            {"omnibus", r.omnibus.empty() ? Json() : Json(r.omnibus)},
            {"statistic", detail::optional_json(r.statistic)},
            {"p_value", detail::optional_json(r.p_value)},
            {"critical_difference", detail::optional_json(r.critical_difference)},
            {"adjustment", r.adjustment},
            {"alpha", r.alpha},
            {"ordering_by", r.ordering_by},
            {"ordering", ordering},
            {"significant_pairs", r.significant_count()},
            {"pairs", pairs},
            {"notes", r.notes}};
}

inline Json to_json(const CalibrationResult& c) {
    const auto& s = c.strong;
    Json bins = Json::array();
    for (const auto& b : c.weak.bins)
        bins.push_back({{"low", b.low}, {"high", b.high}, {"pairs", b.pairs}, {"predicted", b.predicted}, {"real", b.real}});
    return {{"reps", c.reps},
            {"pairs_scored", c.pairs_scored},
            {"pairs_dropped", c.pairs_dropped},
            {"pairs_unbinned", c.pairs_unbinned},
            {"strong",
             {{"within_50", s.within_50},
              {"within_70", s.within_70},
              {"within_90", s.within_90},
              {"above90", s.above90},
              {"below90", s.below90},
              {"err", s.err},
              {"mad", s.mad}}},
            {"weak", bins}};
}

// Markdown renderers. Each takes the full report JSON of one command.

inline std::string render_summary_markdown(const Json& summary) {
    std::string out;
    std::string ranking;
    for (const auto& r : summary["ranking"]) ranking += (ranking.empty() ? "" : ", ") + r["algorithm"].get<std::string>();
    out += "Ranking (best first): " + ranking + "\n";
    const auto& rk = summary["ranking"];
    for (std::size_t p = 0; p + 1 < rk.size(); ++p)
        if (rk[p]["near_tie_with_next"].get<bool>())
            out += "Near tie: " + rk[p]["algorithm"].get<std::string>() + " and " +
                   rk[p + 1]["algorithm"].get<std::string>() + " are within Monte Carlo error\n";
    out += "\n";
    out += detail::md_header({"pair", "mean", "median", "hdi.low", "hdi.high", "delta", "above.50", "in.rope"});
    for (const auto& r : summary["rows"]) {
        std::string pair = r["first"].get<std::string>() + " > " + r["second"].get<std::string>();
        if (r["flagged"].get<bool>()) pair += " (*)";
        out += detail::md_row({pair, detail::fixed(r["mean"]), detail::fixed(r["median"]), detail::fixed(r["hdi_low"]),
                               detail::fixed(r["hdi_high"]), detail::fixed(r["delta"]), detail::fixed(r["above_50"]),
                               detail::fixed(r["in_rope"])});
    }
    out += "\nHDI mass " + detail::fixed(summary["hdi_mass"]) + ", ROPE [" + detail::fixed(summary["rope"]["low"]) +
           ", " + detail::fixed(summary["rope"]["high"]) + "]\n";
    bool flagged = false;
    for (const auto& r : summary["rows"]) flagged = flagged || r["flagged"].get<bool>();
    if (flagged) out += "(*) mean probability below 0.50 although the first algorithm has the higher mean merit\n";
    return out;
}

inline std::string render_convergence_markdown(const Json& c) {
    std::string out = "Convergence: " + c["verdict"].get<std::string>() + " (max R-hat " +
                      detail::fixed(c["max_rhat"], 3) + ", min ESS " + detail::fixed(c["min_ess"], 0) +
                      ", divergences " + std::to_string(c["divergences"].get<long long>()) + ")\n";
    for (const auto& p : c["problems"]) out += "- " + p.get<std::string>() + "\n";
    return out;
}

inline std::string render_compare_markdown(const Json& report) {
    std::string out = "# Bayesian Bradley-Terry comparison\n\n";
    out += "Model: " + report["config"]["model"].get<std::string>() + ", ties: " +
           report["config"]["ties"].get<std::string>() + ", seed: " +
           std::to_string(report["config"]["seed"].get<unsigned long long>()) + "\n\n";
    out += render_summary_markdown(report["summary"]);
    if (report.contains("control") && !report["control"].is_null())
        out += "\nRows limited to control algorithm: " + report["control"].get<std::string>() + "\n";
    out += "\n" + render_convergence_markdown(report["convergence"]);
    return out;
}

inline std::string render_diagnose_markdown(const Json& report) {
    std::string out = "# Model diagnostics\n\n";
    const auto& cfg = report["config"];
    const auto& s = cfg["sampler"];
    out += "Model: " + cfg["model"].get<std::string>() + ", ties: " + cfg["ties"].get<std::string>() +
           ", hyper-prior: " + cfg["hyper"].get<std::string>() + "\n";
    out += "Sampler: " + std::to_string(s["chains"].get<long long>()) + " chains, " +
           std::to_string(s["warmup"].get<long long>()) + " warmup, " + std::to_string(s["draws"].get<long long>()) +
           " draws, seed " + std::to_string(s["seed"].get<unsigned long long>()) + "\n\n";
    out += render_convergence_markdown(report["convergence"]) + "\n";
    out += detail::md_header({"parameter", "R-hat", "ESS"});
    for (const auto& p : report["convergence"]["parameters"])
        out += detail::md_row({p["name"].get<std::string>(), detail::fixed(p["rhat"], 3), detail::fixed(p["ess"], 0)});
    out += "\n## Posterior predictive coverage\n\n";
    const bool ties = !report["ppc"]["rows"].empty() && report["ppc"]["rows"][0].contains("ties");
    out += ties ? detail::md_header({"HDI", "wins", "ties"}) : detail::md_header({"HDI", "wins"});
    for (const auto& r : report["ppc"]["rows"]) {
        std::vector<std::string> cells{detail::fixed(r["mass"]), detail::fixed(r["wins"])};
        if (ties) cells.push_back(detail::fixed(r["ties"]));
        out += detail::md_row(cells);
    }
    const auto& w = report["waic"];
    out += "\n## WAIC\n\n";
    out += detail::md_header({"waic", "lppd", "p_waic", "units"});
    out += detail::md_row({detail::fixed(w["waic"]), detail::fixed(w["lppd"]), detail::fixed(w["p_waic"]),
                           std::to_string(w["units"].get<long long>()) + " " + w["unit"].get<std::string>() + "s"});
    for (const auto& n : report["notes"]) out += "\nNote: " + n.get<std::string>() + "\n";
    return out;
}

inline std::string render_mle_markdown(const Json& report) {
    const auto& m = report["mle"];
    std::string out = "# Maximum likelihood Bradley-Terry weights\n\n";
    out += detail::md_header({"algorithm", "weight"});
    for (const auto& w : m["weights"]) out += detail::md_row({w["algorithm"].get<std::string>(), detail::fixed(w["weight"], 4)});
    out += "\n";
    out += detail::md_header({"pair", "P(first beats second)"});
    for (const auto& p : m["pairs"])
        out += detail::md_row({p["first"].get<std::string>() + " > " + p["second"].get<std::string>(), detail::fixed(p["prob"])});
    out += "\nIterations: " + std::to_string(m["iterations"].get<long long>()) +
           (m["converged"].get<bool>() ? " (converged)" : " (not converged)") + ", log-likelihood " +
           detail::fixed(m["log_likelihood"], 4) + "\n";
    return out;
}

inline std::string render_freq_markdown(const Json& report) {
    std::string out = "# Frequentist baselines\n";
    for (const auto& r : report["procedures"]) {
        out += "\n## " + r["procedure"].get<std::string>() + "\n\n";
        if (!r["omnibus"].is_null())
            out += r["omnibus"].get<std::string>() + " statistic " + detail::fixed(r["statistic"], 3) + ", p-value " +
                   detail::fixed(r["p_value"], 4) + "\n";
        if (!r["critical_difference"].is_null())
            out += "Critical difference: " + detail::fixed(r["critical_difference"], 3) + "\n";
        out += "Ordering by " + r["ordering_by"].get<std::string>() + ":";
        for (const auto& o : r["ordering"])
            out += " " + o["algorithm"].get<std::string>() + " (" + detail::fixed(o["value"], 3) + ")";
        out += "\n\n";
        const bool pvals = r["adjustment"].get<std::string>() != "nemenyi";
        out += pvals ? detail::md_header({"pair", "statistic", "p", "p.adjusted", "significant"})
                     : detail::md_header({"pair", "rank gap", "significant"});
        for (const auto& p : r["pairs"]) {
            std::vector<std::string> cells{p["first"].get<std::string>() + " > " + p["second"].get<std::string>(),
                                           detail::fixed(p["statistic"], pvals ? 1 : 3)};
            if (pvals) {
                cells.push_back(detail::fixed(p["p_raw"], 4));
                cells.push_back(detail::fixed(p["p_adjusted"], 4));
            }
            cells.push_back(p["significant"].get<bool>() ? "yes" : "no");
            out += detail::md_row(cells);
        }
        out += "\nSignificant pairs at alpha " + detail::fixed(r["alpha"]) + ": " +
               std::to_string(r["significant_pairs"].get<long long>()) + "\n";
        for (const auto& n : r["notes"]) out += "Note: " + n.get<std::string>() + "\n";
    }
    return out;
}

inline std::string render_calibration_markdown(const Json& report) {
    const auto& c = report["calibration"];
    const auto& s = c["strong"];
    std::string out = "# Predictive calibration\n\n";
    out += "Repetitions: " + std::to_string(c["reps"].get<long long>()) + ", pairs scored " +
           std::to_string(c["pairs_scored"].get<long long>()) + ", dropped " +
           std::to_string(c["pairs_dropped"].get<long long>()) + "\n\n## Strong\n\n";
    out += detail::md_header({"within_50", "within_70", "within_90", "above90", "below90", "err", "mad"});
    out += detail::md_row({detail::fixed(s["within_50"]), detail::fixed(s["within_70"]), detail::fixed(s["within_90"]),
                           detail::fixed(s["above90"]), detail::fixed(s["below90"]), detail::fixed(s["err"], 3),
                           detail::fixed(s["mad"], 3)});
    out += "\n## Weak\n\n";
    out += detail::md_header({"bin", "pairs", "predicted", "real"});
    for (const auto& b : c["weak"]) {
        const bool last = b["high"].get<double>() >= 1.0;
        out += detail::md_row({"[" + detail::fixed(b["low"], 1) + ", " + detail::fixed(b["high"], 1) + (last ? "]" : ")"),
                               std::to_string(b["pairs"].get<long long>()), detail::fixed(b["predicted"], 1),
                               std::to_string(b["real"].get<long long>())});
    }
    return out;
}

inline std::string render_markdown(const Json& report) {
    const auto cmd = report["command"].get<std::string>();
    if (cmd == "compare") return render_compare_markdown(report);
    if (cmd == "diagnose") return render_diagnose_markdown(report);
    if (cmd == "mle") return render_mle_markdown(report);
    if (cmd == "freq") return render_freq_markdown(report);
    if (cmd == "calibrate") return render_calibration_markdown(report);
    return report.dump(2) + "\n";
}

// The main table of each command as CSV.
inline std::string render_csv(const Json& report) {
    const auto cmd = report["command"].get<std::string>();
    if (cmd == "compare") return detail::csv_table(report["summary"]["rows"]);
    if (cmd == "diagnose") return detail::csv_table(report["convergence"]["parameters"]);
    if (cmd == "mle") return detail::csv_table(report["mle"]["pairs"]);
    if (cmd == "freq") {
        Json rows = Json::array();
        for (const auto& r : report["procedures"])
            for (const auto& p : r["pairs"]) {
                Json row = {{"procedure", r["procedure"]}};
                for (const auto& [k, v] : p.items()) row[k] = v;
                rows.push_back(row);
            }
        return detail::csv_table(rows);
    }
    if (cmd == "calibrate") {
        Json row = report["calibration"]["strong"];
        row["reps"] = report["calibration"]["reps"];
        return detail::csv_table(Json::array({row})) + "\n" + detail::csv_table(report["calibration"]["weak"]);
    }
    return "";
}

inline std::string render(const Json& report, Format format) {
    switch (format) {
    case Format::json: return report.dump(2) + "\n";
    case Format::csv: return render_csv(report);
    case Format::markdown: return render_markdown(report);
    }
    return "";
}

} // namespace bbt

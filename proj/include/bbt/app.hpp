#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "bbt/calibration.hpp"
#include "bbt/convergence.hpp"
#include "bbt/fit.hpp"
#include "bbt/freq.hpp"
#include "bbt/mle.hpp"
#include "bbt/model_checks.hpp"
#include "bbt/report.hpp"
#include "bbt/results.hpp"
#include "bbt/summary.hpp"
#include "bbt/svg.hpp"
#include "bbt/wintable.hpp"

namespace bbt {

enum class PlotKind { forest, cd };

struct RunConfig {
    std::string input;
    std::optional<Direction> direction;
    std::optional<TiesPolicy> ties; // unset: spread for bt, keep for davidson
    std::optional<bool> local_rope; // unset: on when the input has folds
    double d_min = 0.4;
    bool paired = true;
    RopeConfig rope;
    double hdi_mass = 0.89;
    SamplerConfig sampler;
    PriorConfig prior;
    ModelKind model = ModelKind::bradley_terry;
    std::optional<std::string> control;
    Format format = Format::markdown;
    std::string output; // empty: standard output

    // freq
    std::string method = "both"; // demsar, wilcoxon, both
    PAdjust adjust = PAdjust::hochberg;
    double alpha = 0.05;

    // calibrate
    UseCase use_case = UseCase::ss;
    std::size_t reps = 10;
    std::size_t held_out = 10;
    bool synthetic = false;
    long n_train = 200;
    long n_test = 2000;

    // plot
    PlotKind plot = PlotKind::forest;

    TiesPolicy effective_ties() const {
        return ties.value_or(model == ModelKind::davidson ? TiesPolicy::keep : TiesPolicy::spread);
    }

    void validate() const {
        if (model == ModelKind::davidson && ties && *ties != TiesPolicy::keep)
            throw ConfigError("the Davidson model uses the ties themselves; use --ties keep (or omit --ties)");
        if (model == ModelKind::bradley_terry && ties == TiesPolicy::keep)
            throw ConfigError("--ties keep needs --model davidson; the Bradley-Terry model takes add, spread or forget");
        if (!(hdi_mass > 0 && hdi_mass <= 1)) throw ConfigError("--hdi must be in (0, 1]");
        if (!(alpha > 0 && alpha < 1)) throw ConfigError("--alpha must be in (0, 1)");
        if (method != "demsar" && method != "wilcoxon" && method != "both")
            throw ConfigError("--method must be demsar, wilcoxon or both");
        if (n_train < 1 || n_test < 1) throw ConfigError("--n-train and --n-test must be >= 1");
        rope.validate();
        sampler.validate();
        prior.validate();
        LocalRopeConfig{true, d_min, paired}.validate();
    }
};

struct RunOutput {
    Json report;
    std::optional<std::string> raw; // non-JSON artifact (SVG)
    int exit_code = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("error while writing '" + path + "'");
}

inline ResultsTable load_table(const RunConfig& config) {
    ParseOptions options;
    options.direction = config.direction;
    return parse_results(read_file(config.input), options);
}

inline LocalRopeConfig local_rope_for(const RunConfig& config, const ResultsTable& table) {
    return {config.local_rope.value_or(table.folded()), config.d_min, config.paired};
}

inline WinTable prepare_wintable(const RunConfig& config, const ResultsTable& table) {
    return apply_ties_policy(build_wintable(table, local_rope_for(config, table)), config.effective_ties());
}

inline Json config_json(const RunConfig& config, const ResultsTable* table = nullptr) {
    const auto& s = config.sampler;
    Json j = {{"input", config.input},
              {"model", to_string(config.model)},
              {"ties", to_string(config.effective_ties())},
              {"hyper", config.prior.describe()},
              {"rope", {{"low", config.rope.low}, {"high", config.rope.high}}},
              {"hdi_mass", config.hdi_mass},
              {"seed", s.seed},
              {"sampler",
               {{"chains", s.chains},
                {"warmup", s.warmup},
                {"draws", s.draws},
                {"seed", s.seed},
                {"target_accept", s.target_accept},
                {"max_depth", s.max_depth}}}};
    if (config.model == ModelKind::davidson) j["nu_prior_sd"] = config.prior.nu_prior_sd;
    if (table) {
        const auto lr = local_rope_for(config, *table);
        j["direction"] = to_string(table->direction());
        j["local_rope"] = lr.enabled ? Json{{"d_min", lr.d_min}, {"paired", lr.paired}} : Json();
        j["algorithms"] = table->algorithms();
        j["datasets"] = table->num_datasets();
        j["folded"] = table->folded();
    }
    return j;
}

inline RunOutput run_compare(const RunConfig& config) {
    config.validate();
    const auto table = load_table(config);
    const auto wt = prepare_wintable(config, table);
    const auto fit = fit_model(wt, config.model, config.prior, config.sampler);
    const auto conv = convergence_report(fit.draws);
    auto summary = summarize(fit, config.rope, config.hdi_mass);
    if (config.control) summary = control_view(summary, *config.control);

    RunOutput out;
    Json warnings = Json::array();
    if (!conv.pass) {
        warnings.push_back("convergence checks failed; treat the results with caution");
        out.exit_code = 1;
    }
    out.report = {{"command", "compare"},
                  {"config", config_json(config, &table)},
                  {"wintable", to_json(wt)},
                  {"summary", to_json(summary)},
                  {"control", config.control ? Json(*config.control) : Json()},
                  {"convergence", to_json(conv, fit.draws)},
                  {"warnings", warnings},
                  {"status", out.exit_code == 0 ? "ok" : "warning"}};
    return out;
}

inline RunOutput run_diagnose(const RunConfig& config) {
    config.validate();
    const auto table = load_table(config);
    const auto wt = prepare_wintable(config, table);
    const auto fit = fit_model(wt, config.model, config.prior, config.sampler);
    const auto conv = convergence_report(fit.draws);
    const auto ppc = ppc_coverage(ppc_replicates(fit, config.sampler.seed));
    const auto w = waic(fit);

    RunOutput out;
    out.exit_code = conv.pass ? 0 : 1;
    Json notes = Json::array();
    notes.push_back("WAIC pointwise unit: one algorithm pair, with binomial/multinomial coefficients");
    if (config.model == ModelKind::davidson)
        notes.push_back("tie parameter prior Normal(0, " + detail::fixed(config.prior.nu_prior_sd, 1) +
                        ") is a modelling choice");
    out.report = {{"command", "diagnose"},
                  {"config", config_json(config, &table)},
                  {"convergence", to_json(conv, fit.draws)},
                  {"ppc", to_json(ppc)},
                  {"waic", to_json(w)},
                  {"notes", notes},
                  {"status", out.exit_code == 0 ? "ok" : "warning"}};
    return out;
}

inline RunOutput run_mle(const RunConfig& config) {
    config.validate();
    if (config.model == ModelKind::davidson) throw ConfigError("mle fits the Bradley-Terry model only");
    const auto table = load_table(config);
    const auto wt = prepare_wintable(config, table);
    const auto m = mle_mm(wt);
    RunOutput out;
    out.exit_code = m.converged ? 0 : 1;
    out.report = {{"command", "mle"},
                  {"config", {{"input", config.input}, {"ties", to_string(config.effective_ties())}}},
                  {"wintable", to_json(wt)},
                  {"mle", to_json(m)}};
    return out;
}

inline RunOutput run_freq(const RunConfig& config) {
    config.validate();
    const auto table = load_table(config);
    Json procs = Json::array();
    if (config.method == "demsar" || config.method == "both")
        procs.push_back(to_json(demsar_procedure(table, config.alpha)));
    if (config.method == "wilcoxon" || config.method == "both")
        procs.push_back(to_json(pairwise_wilcoxon_procedure(table, config.adjust, config.alpha)));
    RunOutput out;
    out.report = {{"command", "freq"},
                  {"config",
                   {{"input", config.input},
                    {"method", config.method},
                    {"adjust", to_string(config.adjust)},
                    {"alpha", config.alpha},
                    {"direction", to_string(table.direction())}}},
                  {"procedures", procs}};
    return out;
}

inline RunOutput run_calibrate(const RunConfig& config) {
    config.validate();
    if (config.model == ModelKind::davidson) throw ConfigError("calibration uses the Bradley-Terry model");
    const auto table = load_table(config);
    Json cfg = config_json(config, &table);
    cfg["reps"] = config.reps;
    CalibrationResult result;
    if (config.synthetic) {
        // Merits fixed at the posterior mean of a fit to the whole input.
        const auto fit = fit_bt(prepare_wintable(config, table), config.prior, config.sampler);
        SyntheticCalibrationConfig sc;
        sc.algorithms = table.algorithms();
        for (std::size_t i = 0; i < table.num_algorithms(); ++i) {
            const auto v = fit.draws.pooled(i);
            double s = 0.0;
            for (double x : v) s += x;
            sc.truth.push_back(s / static_cast<double>(v.size()));
        }
        sc.n_train = config.n_train;
        sc.n_test = config.n_test;
        sc.reps = config.reps;
        sc.seed = config.sampler.seed;
        sc.prior = config.prior;
        sc.sampler = config.sampler;
        result = run_synthetic_calibration(sc);
        cfg["mode"] = "synthetic";
        cfg["truth"] = sc.truth;
        cfg["n_train"] = config.n_train;
        cfg["n_test"] = config.n_test;
    } else {
        CalibrationConfig cc;
        cc.use_case = config.use_case;
        cc.reps = config.reps;
        cc.held_out = config.held_out;
        cc.seed = config.sampler.seed;
        cc.ties = config.effective_ties();
        cc.local_rope = local_rope_for(config, table);
        cc.prior = config.prior;
        cc.sampler = config.sampler;
        result = run_calibration(table, cc);
        cfg["mode"] = "held-out";
        cfg["use_case"] = to_string(config.use_case);
        cfg["held_out"] = config.held_out;
    }
    RunOutput out;
    out.report = {{"command", "calibrate"}, {"config", cfg}, {"calibration", to_json(result)}};
    return out;
}

inline RunOutput run_plot(const RunConfig& config) {
    config.validate();
    const auto table = load_table(config);
    RunOutput out;
    if (config.plot == PlotKind::cd) {
        const auto rep = demsar_procedure(table, config.alpha);
        out.raw = cd_diagram_svg(rep);
        out.report = {{"command", "plot"}, {"kind", "cd"}, {"freq", to_json(rep)}};
        return out;
    }
    const auto wt = prepare_wintable(config, table);
    const auto fit = fit_model(wt, config.model, config.prior, config.sampler);
    const auto conv = convergence_report(fit.draws);
    auto summary = summarize(fit, config.rope, config.hdi_mass);
    if (config.control) summary = control_view(summary, *config.control);
    out.raw = forest_plot_svg(summary);
    out.exit_code = conv.pass ? 0 : 1;
    out.report = {{"command", "plot"}, {"kind", "forest"}, {"summary", to_json(summary)}};
    return out;
}

} // namespace bbt

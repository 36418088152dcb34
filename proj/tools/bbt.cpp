#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bbt/bbt.hpp"

namespace {

struct Options {
    bbt::RunConfig run;
    std::string ties;
    std::string hyper = "lognormal:0.5";
    std::string model = "bt";
    std::string format = "markdown";
    std::string control;
    std::string adjust = "hochberg";
    std::string use_case = "ss";
    std::string plot = "forest";
    bool minimize = false;
    bool local_rope = false;
    bool no_local_rope = false;
    bool unpaired = false;
    bool serial = false;
};

void add_input(CLI::App* sub, Options& o) {
    sub->add_option("input", o.run.input, "Results CSV (dataset,algorithm[,fold],measure)")->required();
    sub->add_flag("--minimize", o.minimize, "Lower measures are better");
    sub->add_option("-o,--output", o.run.output, "Write the report here instead of standard output");
}

void add_model(CLI::App* sub, Options& o) {
    sub->add_option("--ties", o.ties, "Ties policy: add, spread, forget, keep (default spread; keep for davidson)");
    sub->add_flag("--local-rope", o.local_rope, "Count per-data-set ties by effect size (needs folds)");
    sub->add_flag("--no-local-rope", o.no_local_rope, "Compare fold means even when folds are present");
    sub->add_option("--d-min", o.run.d_min, "Effect size below which a data set is a tie")->capture_default_str();
    sub->add_flag("--unpaired", o.unpaired, "Use the unpaired effect size");
    sub->add_option("--hyper", o.hyper, "Hyper-prior: lognormal:S, cauchy:S or normal:S")->capture_default_str();
    sub->add_option("--model", o.model, "bt or davidson")->capture_default_str();
    sub->add_option("--seed", o.run.sampler.seed, "Random seed")->capture_default_str();
    sub->add_option("--chains", o.run.sampler.chains, "Number of chains")->capture_default_str();
    sub->add_option("--warmup", o.run.sampler.warmup, "Warmup iterations per chain")->capture_default_str();
    sub->add_option("--draws", o.run.sampler.draws, "Kept draws per chain")->capture_default_str();
    sub->add_option("--target-accept", o.run.sampler.target_accept, "Step size adaptation target")
        ->capture_default_str();
    sub->add_flag("--serial", o.serial, "Run chains one after another");
}

void add_summary(CLI::App* sub, Options& o) {
    sub->add_option("--rope-low", o.run.rope.low, "Lower ROPE bound")->capture_default_str();
    sub->add_option("--rope-high", o.run.rope.high, "Upper ROPE bound")->capture_default_str();
    sub->add_option("--hdi", o.run.hdi_mass, "HDI mass")->capture_default_str();
    sub->add_option("--control", o.control, "Only show rows involving this algorithm");
}

void add_format(CLI::App* sub, Options& o) {
    sub->add_option("--format", o.format, "markdown, csv or json")->capture_default_str();
}

void finalize(Options& o) {
    auto& r = o.run;
    if (o.minimize) r.direction = bbt::Direction::lower_is_better;
    if (!o.ties.empty()) r.ties = bbt::parse_ties_policy(o.ties);
    if (o.local_rope && o.no_local_rope) throw bbt::ConfigError("--local-rope and --no-local-rope conflict");
    if (o.local_rope) r.local_rope = true;
    if (o.no_local_rope) r.local_rope = false;
    r.paired = !o.unpaired;
    r.prior = bbt::parse_hyper_prior(o.hyper);
    r.model = bbt::parse_model_kind(o.model);
    r.format = bbt::parse_format(o.format);
    if (!o.control.empty()) r.control = o.control;
    r.adjust = bbt::parse_p_adjust(o.adjust);
    r.use_case = bbt::parse_use_case(o.use_case);
    if (o.plot == "forest") r.plot = bbt::PlotKind::forest;
    else if (o.plot == "cd") r.plot = bbt::PlotKind::cd;
    else throw bbt::ConfigError("--kind must be forest or cd");
    r.sampler.parallel = !o.serial;
}

void emit(const bbt::RunConfig& config, const std::string& text) {
    if (config.output.empty()) std::cout << text;
    else bbt::write_file(config.output, text);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian Bradley-Terry comparison of algorithms across data sets"};
    app.require_subcommand(1);
    Options o;

    auto* compare = app.add_subcommand("compare", "Fit the model and report pairwise probabilities");
    add_input(compare, o);
    add_model(compare, o);
    add_summary(compare, o);
    add_format(compare, o);

    auto* diagnose = app.add_subcommand("diagnose", "Convergence, posterior predictive coverage and WAIC");
    add_input(diagnose, o);
    add_model(diagnose, o);
    add_format(diagnose, o);

    auto* mle = app.add_subcommand("mle", "Maximum likelihood weights");
    add_input(mle, o);
    mle->add_option("--ties", o.ties, "Ties policy: add, spread, forget");
    mle->add_flag("--local-rope", o.local_rope, "Count per-data-set ties by effect size (needs folds)");
    mle->add_flag("--no-local-rope", o.no_local_rope, "Compare fold means even when folds are present");
    mle->add_option("--d-min", o.run.d_min, "Effect size below which a data set is a tie");
    mle->add_flag("--unpaired", o.unpaired, "Use the unpaired effect size");
    add_format(mle, o);

    auto* freq = app.add_subcommand("freq", "Friedman/Nemenyi and pairwise signed-rank baselines");
    add_input(freq, o);
    freq->add_option("--method", o.run.method, "demsar, wilcoxon or both")->capture_default_str();
    freq->add_option("--adjust", o.adjust, "bonferroni, holm, hochberg, bh, by")->capture_default_str();
    freq->add_option("--alpha", o.run.alpha, "Significance level")->capture_default_str();
    add_format(freq, o);

    auto* calibrate = app.add_subcommand("calibrate", "Score predictions on held-out data sets");
    add_input(calibrate, o);
    add_model(calibrate, o);
    calibrate->add_option("--use-case", o.use_case, "ss (5x20), mm (10x50) or sl (5x100)")->capture_default_str();
    calibrate->add_option("--reps", o.run.reps, "Repetitions")->capture_default_str();
    calibrate->add_option("--held-out", o.run.held_out, "Held-out data sets per repetition")->capture_default_str();
    calibrate->add_flag("--synthetic", o.run.synthetic,
                        "Simulate train and held-out matches from the fitted merits instead");
    calibrate->add_option("--n-train", o.run.n_train, "Synthetic matches per pair for training")
        ->capture_default_str();
    calibrate->add_option("--n-test", o.run.n_test, "Synthetic held-out matches per pair")->capture_default_str();
    add_format(calibrate, o);

    auto* plot = app.add_subcommand("plot", "Forest plot or critical difference diagram as SVG");
    add_input(plot, o);
    add_model(plot, o);
    add_summary(plot, o);
    plot->add_option("--kind", o.plot, "forest or cd")->capture_default_str();
    plot->add_option("--alpha", o.run.alpha, "Significance level for the cd diagram")->capture_default_str();

    double d = 0.4, alpha = 0.3, power = 0.7;
    auto* pw = app.add_subcommand("power", "Sample size for a two-sided t-test");
    pw->add_option("--d", d, "Effect size")->capture_default_str();
    pw->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    pw->add_option("--power", power, "Target power")->capture_default_str();
    pw->add_flag("--unpaired", o.unpaired, "Two-sample instead of paired");

    std::string convert_input;
    auto* convert = app.add_subcommand("convert", "Wide table (dataset,alg1,alg2,...) to long format");
    convert->add_option("input", convert_input, "Wide CSV")->required();
    convert->add_option("-o,--output", o.run.output, "Output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    try {
        finalize(o);
        if (pw->parsed()) {
            const double n = bbt::t_test_power_n(d, alpha, power, !o.unpaired);
            std::printf("n = %.5f (%s)\n", n, o.unpaired ? "two-sample, per group" : "paired");
            return 0;
        }
        if (convert->parsed()) {
            emit(o.run, bbt::wide_to_long(bbt::read_file(convert_input)));
            return 0;
        }
        bbt::RunOutput out;
        if (compare->parsed()) out = bbt::run_compare(o.run);
        else if (diagnose->parsed()) out = bbt::run_diagnose(o.run);
        else if (mle->parsed()) out = bbt::run_mle(o.run);
        else if (freq->parsed()) out = bbt::run_freq(o.run);
        else if (calibrate->parsed()) out = bbt::run_calibrate(o.run);
        else if (plot->parsed()) out = bbt::run_plot(o.run);
        emit(o.run, out.raw ? *out.raw : bbt::render(out.report, o.run.format));
        if (out.exit_code == 1) std::cerr << "warning: diagnostics reported problems (see report)\n";
        return out.exit_code;
    } catch (const bbt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbt/fit.hpp"
#include "bbt/results.hpp"
#include "bbt/summary.hpp"
#include "bbt/wintable.hpp"

namespace bbt {

enum class UseCase { ss, mm, sl };

struct UseCaseShape {
    std::size_t algorithms;
    std::size_t datasets;
};

inline UseCaseShape shape_of(UseCase u) {
    switch (u) {
    case UseCase::ss: return {5, 20};
    case UseCase::mm: return {10, 50};
    case UseCase::sl: return {5, 100};
    }
    return {5, 20};
}

inline UseCase parse_use_case(std::string_view s) {
    if (s == "ss") return UseCase::ss;
    if (s == "mm") return UseCase::mm;
    if (s == "sl") return UseCase::sl;
    throw ConfigError("unknown use case '" + std::string(s) + "' (ss, mm, sl)");
}

inline const char* to_string(UseCase u) {
    return u == UseCase::ss ? "ss" : u == UseCase::mm ? "mm" : "sl";
}

struct CalibrationConfig {
    UseCase use_case = UseCase::ss;
    std::size_t reps = 10;
    std::size_t held_out = 10;
    std::uint64_t seed = 42;
    TiesPolicy ties = TiesPolicy::spread;
    LocalRopeConfig local_rope;
    PriorConfig prior;
    SamplerConfig sampler;
};

struct StrongCalibration {
    double within_50 = 0, within_70 = 0, within_90 = 0;
    double above90 = 0, below90 = 0;
    double err = 0; // mean of (mean prediction - empirical ratio)
    double mad = 0; // median of |mean prediction - empirical ratio|
};

struct WeakBin {
    double low = 0, high = 0;
    std::size_t pairs = 0;
    double predicted = 0; // sum of above_50
    std::size_t real = 0; // pairs where the first algorithm won more held-out matches
};

struct WeakCalibration {
    std::array<WeakBin, 3> bins{{{0.5, 0.7}, {0.7, 0.9}, {0.9, 1.0}}};
};

struct CalibrationResult {
    std::size_t reps = 0;
    std::size_t pairs_scored = 0;
    std::size_t pairs_dropped = 0; // empirical ratio undefined
    std::size_t pairs_unbinned = 0; // above_50 below 0.5
    StrongCalibration strong;
    WeakCalibration weak;
};

// win_i / (win_i + win_j) over data sets where both are present, compared
// by plain means; exact ties count for neither side.
inline std::optional<double> empirical_win_ratio(const ResultsTable& test, std::size_t i, std::size_t j,
                                                 Direction direction) {
    if (i == j) throw ConfigError("empirical win ratio needs two different algorithms");
    long wi = 0, wj = 0;
    for (std::size_t d = 0; d < test.num_datasets(); ++d) {
        if (!test.has(d, i) || !test.has(d, j)) continue;
        const double a = test.mean(d, i), b = test.mean(d, j);
        if (a == b) continue;
        ((a > b) == (direction == Direction::higher_is_better) ? wi : wj) += 1;
    }
    if (wi + wj == 0) return std::nullopt;
    return static_cast<double>(wi) / static_cast<double>(wi + wj);
}

namespace detail {

// Accumulates per-pair scores across repetitions.
class CalibrationAccumulator {
public:
    void add(const std::vector<double>& p_draws, double above_50, long wins_first, long wins_second) {
        if (wins_first + wins_second == 0) {
            ++result_.pairs_dropped;
            return;
        }
        ++result_.pairs_scored;
        const double r = static_cast<double>(wins_first) / static_cast<double>(wins_first + wins_second);
        const auto in = [&](double mass) {
            const auto [lo, hi] = hdi(p_draws, mass);
            return std::pair{r < lo, r > hi};
        };
        const auto [below50, above50] = in(0.5);
        const auto [below70, above70] = in(0.7);
        const auto [below90, above90] = in(0.9);
        if (!below50 && !above50) ++w50_;
        if (!below70 && !above70) ++w70_;
        if (!below90 && !above90) ++w90_;
        if (above90) ++a90_;
        if (below90) ++b90_;
        double mean = 0.0;
        for (double x : p_draws) mean += x;
        mean /= static_cast<double>(p_draws.size());
        errors_.push_back(mean - r);

        if (above_50 < 0.5) {
            ++result_.pairs_unbinned;
            return;
        }
        auto& bins = result_.weak.bins;
        WeakBin& bin = above_50 < 0.7 ? bins[0] : above_50 < 0.9 ? bins[1] : bins[2];
        ++bin.pairs;
        bin.predicted += above_50;
        if (wins_first > wins_second) ++bin.real;
    }

    CalibrationResult finish(std::size_t reps) {
        result_.reps = reps;
        if (result_.pairs_scored > 0) {
            const double n = static_cast<double>(result_.pairs_scored);
            auto& s = result_.strong;
            s.within_50 = static_cast<double>(w50_) / n;
            s.within_70 = static_cast<double>(w70_) / n;
            s.within_90 = static_cast<double>(w90_) / n;
            s.above90 = static_cast<double>(a90_) / n;
            s.below90 = static_cast<double>(b90_) / n;
            double sum = 0.0;
            std::vector<double> abs_err;
            for (double e : errors_) {
                sum += e;
                abs_err.push_back(std::fabs(e));
            }
            s.err = sum / n;
            s.mad = median(abs_err);
        }
        return result_;
    }

private:
    CalibrationResult result_;
    std::size_t w50_ = 0, w70_ = 0, w90_ = 0, a90_ = 0, b90_ = 0;
    std::vector<double> errors_;
};

} // namespace detail

// Repeatedly fits on a random train split and scores predictions against
// data sets held out from that fit.
inline CalibrationResult run_calibration(const ResultsTable& full, const CalibrationConfig& config) {
    const auto shape = shape_of(config.use_case);
    if (config.reps > 0 &&
        (shape.algorithms > full.num_algorithms() || shape.datasets + config.held_out > full.num_datasets()))
        throw InsufficientDataError(std::string("use case ") + to_string(config.use_case) + " needs " +
                                    std::to_string(shape.algorithms) + " algorithms and " +
                                    std::to_string(shape.datasets) + " + " + std::to_string(config.held_out) +
                                    " data sets; the input has " + std::to_string(full.num_algorithms()) +
                                    " and " + std::to_string(full.num_datasets()));
    detail::CalibrationAccumulator acc;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(config.seed, rep);
        const auto split = subsample(full, shape.algorithms, shape.datasets, config.held_out, rep_seed);
        const auto wt = apply_ties_policy(build_wintable(split.train, config.local_rope), config.ties);
        SamplerConfig sc = config.sampler;
        sc.seed = rep_seed;
        const auto fit = fit_bt(wt, config.prior, sc);
        const auto summary = summarize(fit);
        const ResultsTable test = aggregate_folds(split.held_out);
        for (const auto& row : summary.rows) {
            long wf = 0, ws = 0;
            for (std::size_t d = 0; d < test.num_datasets(); ++d) {
                if (!test.has(d, row.first) || !test.has(d, row.second)) continue;
                const double a = test.mean(d, row.first), b = test.mean(d, row.second);
                if (a == b) continue;
                ((a > b) == (test.direction() == Direction::higher_is_better) ? wf : ws) += 1;
            }
            acc.add(pair_probability_draws(fit.draws, row.first, row.second), row.above_50, wf, ws);
        }
    }
    return acc.finish(config.reps);
}

struct SyntheticCalibrationConfig {
    std::vector<std::string> algorithms;
    std::vector<double> truth; // merits generating both train and held-out matches
    long n_train = 200;
    long n_test = 2000;
    std::size_t reps = 20;
    std::uint64_t seed = 42;
    PriorConfig prior;
    SamplerConfig sampler;
};

// Self-consistency check: train and held-out matches both drawn from the
// Bradley-Terry model with known merits.
inline CalibrationResult run_synthetic_calibration(const SyntheticCalibrationConfig& config) {
    const std::size_t k = config.truth.size();
    if (k < 2 || config.algorithms.size() != k)
        throw ConfigError("synthetic calibration needs at least 2 named merits");
    detail::CalibrationAccumulator acc;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const std::uint64_t rep_seed = derive_seed(config.seed, rep);
        Rng rng(derive_seed(rep_seed, 0xca1));
        WinTable wt(config.algorithms);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) {
                const long w = rng.binomial(config.n_train, pair_prob(config.truth[i], config.truth[j]));
                wt.set(i, j, w, config.n_train - w, 0);
            }
        SamplerConfig sc = config.sampler;
        sc.seed = rep_seed;
        const auto fit = fit_bt(wt, config.prior, sc);
        for (const auto& row : summarize(fit).rows) {
            const long wf = rng.binomial(config.n_test, pair_prob(config.truth[row.first], config.truth[row.second]));
            acc.add(pair_probability_draws(fit.draws, row.first, row.second), row.above_50, wf, config.n_test - wf);
        }
    }
    return acc.finish(config.reps);
}

} // namespace bbt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bbt/error.hpp"
#include "bbt/results.hpp"

namespace bbt {

enum class TiesPolicy { add, spread, forget, keep };

inline const char* to_string(TiesPolicy p) {
    switch (p) {
    case TiesPolicy::add: return "add";
    case TiesPolicy::spread: return "spread";
    case TiesPolicy::forget: return "forget";
    case TiesPolicy::keep: return "keep";
    }
    return "?";
}

inline TiesPolicy parse_ties_policy(std::string_view s) {
    if (s == "add") return TiesPolicy::add;
    if (s == "spread") return TiesPolicy::spread;
    if (s == "forget") return TiesPolicy::forget;
    if (s == "keep") return TiesPolicy::keep;
    throw ConfigError("unknown ties policy '" + std::string(s) + "' (add, spread, forget, keep)");
}

// Per-data-set tie rule: a tie when the effect size between the two
// algorithms' fold measures is at most `d_min`.
struct LocalRopeConfig {
    bool enabled = false;
    double d_min = 0.4;
    bool paired = true;

    void validate() const {
        if (!(d_min >= 0.0) || !std::isfinite(d_min)) throw ConfigError("d_min must be >= 0");
    }
};

// Pairwise match counts. wins(i, j) is the number of matches i won against
// j; ties(i, j) is symmetric; the match count is wins + wins + ties.
class WinTable {
public:
    WinTable() = default;
    explicit WinTable(std::vector<std::string> algorithms)
        : algorithms_(std::move(algorithms)), k_(algorithms_.size()),
          wins_(k_ * k_, 0), ties_(k_ * k_, 0) {}

    const std::vector<std::string>& algorithms() const { return algorithms_; }
    std::size_t size() const { return k_; }

    long wins(std::size_t i, std::size_t j) const { return wins_[i * k_ + j]; }
    long ties(std::size_t i, std::size_t j) const { return ties_[i * k_ + j]; }
    long n(std::size_t i, std::size_t j) const { return wins(i, j) + wins(j, i) + ties(i, j); }

    void add_win(std::size_t winner, std::size_t loser, long count = 1) {
        wins_[winner * k_ + loser] += count;
    }
    void add_tie(std::size_t i, std::size_t j, long count = 1) {
        ties_[i * k_ + j] += count;
        ties_[j * k_ + i] += count;
    }
    void set(std::size_t i, std::size_t j, long wins_ij, long wins_ji, long ties_ij) {
        wins_[i * k_ + j] = wins_ij;
        wins_[j * k_ + i] = wins_ji;
        ties_[i * k_ + j] = ties_[j * k_ + i] = ties_ij;
    }

    bool has_ties() const {
        return std::any_of(ties_.begin(), ties_.end(), [](long t) { return t != 0; });
    }

    // Total wins of algorithm i.
    long total_wins(std::size_t i) const {
        long s = 0;
        for (std::size_t j = 0; j < k_; ++j) s += wins(i, j);
        return s;
    }

    bool operator==(const WinTable&) const = default;

private:
    std::vector<std::string> algorithms_;
    std::size_t k_ = 0;
    std::vector<long> wins_;
    std::vector<long> ties_;
};

// Standardized mean difference of x over y. Unpaired uses the root mean of
// the two sample variances; paired uses the sd of the differences.
inline double cohen_d(std::span<const double> x, std::span<const double> y, bool paired) {
    if (x.size() != y.size())
        throw InsufficientDataError("effect size needs equally many folds on both sides");
    if (x.size() < 2) throw InsufficientDataError("effect size needs at least 2 folds");
    const double n = static_cast<double>(x.size());
    auto mean = [n](auto first, auto last) { return std::accumulate(first, last, 0.0) / n; };
    auto var = [n](std::span<const double> v, double m) {
        double s = 0.0;
        for (double e : v) s += (e - m) * (e - m);
        return s / (n - 1.0);
    };
    double numerator, denominator;
    if (paired) {
        std::vector<double> diff(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
        numerator = mean(diff.begin(), diff.end());
        denominator = std::sqrt(var(diff, numerator));
    } else {
        const double mx = mean(x.begin(), x.end());
        const double my = mean(y.begin(), y.end());
        numerator = mx - my;
        denominator = std::sqrt((var(x, mx) + var(y, my)) / 2.0);
    }
    if (denominator == 0.0) {
        if (numerator == 0.0) return 0.0;
        return numerator > 0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
    }
    return numerator / denominator;
}

enum class Outcome { win_a, win_b, tie };

inline Outcome compare_cell(std::span<const double> a, std::span<const double> b,
                            const LocalRopeConfig& config, Direction direction) {
    const bool higher = direction == Direction::higher_is_better;
    if (!config.enabled || (a.size() == 1 && b.size() == 1)) {
        const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
        const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
        if (ma == mb) return Outcome::tie;
        return (ma > mb) == higher ? Outcome::win_a : Outcome::win_b;
    }
    const double d = cohen_d(a, b, config.paired);
    if (std::fabs(d) <= config.d_min) return Outcome::tie;
    return (d > 0) == higher ? Outcome::win_a : Outcome::win_b;
}

// One match per data set on which both algorithms have results.
inline WinTable build_wintable(const ResultsTable& table, const LocalRopeConfig& config,
                               Direction direction) {
    config.validate();
    if (config.enabled && !table.folded())
        throw ConfigError("local ROPE needs fold-level measurements; the input has no fold column");
    const std::size_t k = table.num_algorithms();
    WinTable wt(table.algorithms());
    for (std::size_t d = 0; d < table.num_datasets(); ++d) {
        for (std::size_t i = 0; i < k; ++i) {
            const auto& ci = table.cell(d, i);
            if (!ci) continue;
            for (std::size_t j = i + 1; j < k; ++j) {
                const auto& cj = table.cell(d, j);
                if (!cj) continue;
                switch (compare_cell(*ci, *cj, config, direction)) {
                case Outcome::win_a: wt.add_win(i, j); break;
                case Outcome::win_b: wt.add_win(j, i); break;
                case Outcome::tie: wt.add_tie(i, j); break;
                }
            }
        }
    }
    return wt;
}

inline WinTable build_wintable(const ResultsTable& table, const LocalRopeConfig& config = {}) {
    return build_wintable(table, config, table.direction());
}

inline WinTable apply_ties_policy(const WinTable& wt, TiesPolicy policy) {
    if (policy == TiesPolicy::keep) return wt;
    WinTable out(wt.algorithms());
    for (std::size_t i = 0; i < wt.size(); ++i) {
        for (std::size_t j = i + 1; j < wt.size(); ++j) {
            const long t = wt.ties(i, j);
            long extra = 0;
            if (policy == TiesPolicy::add) extra = t;
            else if (policy == TiesPolicy::spread) extra = (t + 1) / 2;
            out.set(i, j, wt.wins(i, j) + extra, wt.wins(j, i) + extra, 0);
        }
    }
    return out;
}

inline std::string to_csv(const WinTable& wt) {
    std::ostringstream os;
    os << "alg_i,alg_j,n,wins_i,wins_j,ties\n";
    for (std::size_t i = 0; i < wt.size(); ++i)
        for (std::size_t j = i + 1; j < wt.size(); ++j)
            os << wt.algorithms()[i] << ',' << wt.algorithms()[j] << ',' << wt.n(i, j) << ','
               << wt.wins(i, j) << ',' << wt.wins(j, i) << ',' << wt.ties(i, j) << '\n';
    return os.str();
}

} // namespace bbt

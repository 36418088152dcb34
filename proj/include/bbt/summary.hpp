#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bbt/convergence.hpp"
#include "bbt/error.hpp"
#include "bbt/fit.hpp"
#include "bbt/model.hpp"

namespace bbt {

struct RopeConfig {
    double low = 0.45;
    double high = 0.55;

    void validate() const {
        if (!(low >= 0.0 && low < high && high <= 1.0))
            throw ConfigError("ROPE bounds must satisfy 0 <= low < high <= 1");
    }
};

struct ComparisonRow {
    std::size_t first = 0, second = 0;
    std::string first_name, second_name;
    double mean = 0, median = 0, hdi_low = 0, hdi_high = 0, delta = 0;
    double above_50 = 0, in_rope = 0;
    double min = 0, max = 0;
    // Mean below 0.5 although the first algorithm ranks higher.
    bool flagged = false;
};

struct Ranking {
    std::vector<std::size_t> order;       // best first
    std::vector<std::string> names;       // in `order`
    std::vector<double> mean_beta;        // indexed by algorithm
    std::vector<bool> near_tie_with_next; // in `order`, last is always false
};

struct ComparisonSummary {
    double hdi_mass = 0.89;
    RopeConfig rope;
    Ranking ranking;
    std::vector<ComparisonRow> rows;
};

// P_k(i beats j) for every pooled draw.
inline std::vector<double> pair_probability_draws(const PosteriorDraws& draws, std::size_t i, std::size_t j) {
    std::vector<double> out;
    out.reserve(draws.total_draws());
    for (std::size_t c = 0; c < draws.num_chains(); ++c)
        for (std::size_t d = 0; d < draws.draws; ++d) out.push_back(pair_prob(draws.at(c, d, i), draws.at(c, d, j)));
    return out;
}

// Narrowest window of ceil(mass * n) sorted values; the first such window
// wins ties.
inline std::pair<double, double> hdi(std::span<const double> values, double mass) {
    if (values.empty()) throw InsufficientDataError("HDI of an empty sample");
    if (!(mass > 0.0 && mass <= 1.0)) throw ConfigError("HDI mass must be in (0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::size_t m = static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n) - 1e-9));
    m = std::clamp<std::size_t>(m, 1, n);
    std::size_t best = 0;
    double width = v[m - 1] - v[0];
    for (std::size_t s = 1; s + m <= n; ++s) {
        const double w = v[s + m - 1] - v[s];
        if (w < width) {
            width = w;
            best = s;
        }
    }
    return {v[best], v[best + m - 1]};
}

inline double median(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Algorithms by decreasing posterior mean merit; exact ties keep input
// order. Neighbours whose mean difference is within two Monte Carlo
// standard errors are flagged as near ties.
inline Ranking aggregated_ranking(const PosteriorDraws& draws, const std::vector<std::string>& algorithms) {
    const std::size_t k = algorithms.size();
    Ranking r;
    r.mean_beta.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto v = draws.pooled(i);
        double s = 0.0;
        for (double x : v) s += x;
        r.mean_beta[i] = s / static_cast<double>(v.size());
    }
    r.order.resize(k);
    for (std::size_t i = 0; i < k; ++i) r.order[i] = i;
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](std::size_t a, std::size_t b) { return r.mean_beta[a] > r.mean_beta[b]; });
    for (auto i : r.order) r.names.push_back(algorithms[i]);
    r.near_tie_with_next.assign(k, false);
    for (std::size_t p = 0; p + 1 < k; ++p) {
        const std::size_t a = r.order[p], b = r.order[p + 1];
        std::vector<std::vector<double>> chains(draws.num_chains());
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t c = 0; c < draws.num_chains(); ++c)
            for (std::size_t d = 0; d < draws.draws; ++d) {
                const double x = draws.at(c, d, a) - draws.at(c, d, b);
                chains[c].push_back(x);
                sum += x;
                sum2 += x * x;
            }
        const double n = static_cast<double>(draws.total_draws());
        const double mean = sum / n;
        const double var = std::max(0.0, sum2 / n - mean * mean);
        const double ess = draws.draws >= 4 ? effective_sample_size(chains) : n;
        const double mcse = ess > 0 ? std::sqrt(var / ess) : 0.0;
        r.near_tie_with_next[p] = std::fabs(mean) <= 2.0 * mcse;
    }
    return r;
}

inline ComparisonRow summarize_pair(const PosteriorDraws& draws, std::size_t i, std::size_t j,
                                    const std::vector<std::string>& algorithms, const RopeConfig& rope,
                                    double hdi_mass) {
    const auto p = pair_probability_draws(draws, i, j);
    ComparisonRow row;
    row.first = i;
    row.second = j;
    row.first_name = algorithms[i];
    row.second_name = algorithms[j];
    double sum = 0.0;
    std::size_t above = 0, inside = 0;
    for (double x : p) {
        sum += x;
        if (x >= 0.5) ++above;
        if (x >= rope.low && x <= rope.high) ++inside;
    }
    const double n = static_cast<double>(p.size());
    row.mean = sum / n;
    row.median = median(p);
    std::tie(row.hdi_low, row.hdi_high) = hdi(p, hdi_mass);
    row.delta = row.hdi_high - row.hdi_low;
    row.above_50 = static_cast<double>(above) / n;
    row.in_rope = static_cast<double>(inside) / n;
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    row.min = *lo;
    row.max = *hi;
    row.flagged = row.mean < 0.5;
    return row;
}

// One row per unordered pair, higher-ranked algorithm first, rows in
// ranking order.
inline ComparisonSummary summarize(const PosteriorDraws& draws, const std::vector<std::string>& algorithms,
                                   const RopeConfig& rope = {}, double hdi_mass = 0.89) {
    rope.validate();
    ComparisonSummary s;
    s.hdi_mass = hdi_mass;
    s.rope = rope;
    s.ranking = aggregated_ranking(draws, algorithms);
    const auto& order = s.ranking.order;
    for (std::size_t a = 0; a < order.size(); ++a)
        for (std::size_t b = a + 1; b < order.size(); ++b)
            s.rows.push_back(summarize_pair(draws, order[a], order[b], algorithms, rope, hdi_mass));
    return s;
}

inline ComparisonSummary summarize(const Fit& fit, const RopeConfig& rope = {}, double hdi_mass = 0.89) {
    return summarize(fit.draws, fit.algorithms(), rope, hdi_mass);
}

inline ComparisonSummary control_view(const ComparisonSummary& summary, const std::string& control) {
    const auto& names = summary.ranking.names;
    if (std::find(names.begin(), names.end(), control) == names.end()) {
        std::string valid;
        for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown control algorithm '" + control + "'; valid algorithms: " + valid);
    }
    ComparisonSummary out = summary;
    out.rows.clear();
    for (const auto& r : summary.rows)
        if (r.first_name == control || r.second_name == control) out.rows.push_back(r);
    return out;
}

} // namespace bbt

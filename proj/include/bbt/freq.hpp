#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "bbt/error.hpp"
#include "bbt/results.hpp"

namespace bbt {

// Per data set ranks (1 = worst, K = best) with average ranks for ties.
struct RankMatrix {
    std::vector<std::string> algorithms;
    std::vector<std::string> datasets;
    std::vector<std::vector<double>> ranks; // [dataset][algorithm]
    std::vector<double> mean_ranks;
};

struct PairDecision {
    std::size_t first = 0, second = 0; // first is the better-ordered algorithm
    std::string first_name, second_name;
    double statistic = 0.0;            // mean-rank gap or signed-rank statistic
    std::optional<double> p_raw;
    std::optional<double> p_adjusted;
    bool significant = false;
};

struct FreqReport {
    std::string procedure;
    std::string omnibus;               // name of the omnibus test, empty if none
    std::optional<double> statistic;
    std::optional<double> p_value;
    std::optional<double> critical_difference;
    std::string adjustment;
    double alpha = 0.05;
    std::vector<std::string> ordering; // best first
    std::vector<double> ordering_values;
    std::string ordering_by;
    std::vector<PairDecision> pairs;
    std::vector<std::string> notes;

    std::size_t significant_count() const {
        return static_cast<std::size_t>(
            std::count_if(pairs.begin(), pairs.end(), [](const PairDecision& p) { return p.significant; }));
    }
};

namespace detail {

// Average ranks (1-based) of `v` in increasing order; also returns the sizes
// of tied groups through `ties`.
inline std::vector<double> average_ranks(const std::vector<double>& v, std::vector<std::size_t>* ties = nullptr) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t s = 0; s < n;) {
        std::size_t e = s;
        while (e + 1 < n && v[idx[e + 1]] == v[idx[s]]) ++e;
        const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
        for (std::size_t t = s; t <= e; ++t) r[idx[t]] = avg;
        if (ties) ties->push_back(e - s + 1);
        s = e + 1;
    }
    return r;
}

inline void require_complete(const ResultsTable& table, std::string_view procedure) {
    for (std::size_t d = 0; d < table.num_datasets(); ++d)
        for (std::size_t a = 0; a < table.num_algorithms(); ++a)
            if (!table.has(d, a))
                throw MissingDataError(std::string(procedure) + ": missing result for '" + table.algorithms()[a] +
                                       "' on '" + table.datasets()[d] +
                                       "'; there is no agreed way to handle missing data in this procedure, so "
                                       "remove the data set or algorithm, or use the Bayesian comparison");
}

// Nemenyi q values (studentized range quantile / sqrt 2) for K = 2..20.
constexpr std::array<double, 19> nemenyi_q05 = {
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799};
constexpr std::array<double, 19> nemenyi_q10 = {
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
    3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233};

} // namespace detail

inline double nemenyi_q(std::size_t k, double alpha) {
    if (k < 2 || k > 20) throw ConfigError("Nemenyi table covers 2 to 20 algorithms");
    if (std::fabs(alpha - 0.05) < 1e-12) return detail::nemenyi_q05[k - 2];
    if (std::fabs(alpha - 0.10) < 1e-12) return detail::nemenyi_q10[k - 2];
    throw ConfigError("Nemenyi critical values are available for alpha 0.05 and 0.10 only");
}

inline double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
    return nemenyi_q(k, alpha) * std::sqrt(static_cast<double>(k * (k + 1)) / (6.0 * static_cast<double>(n)));
}

// Ranks on per-cell means; the best algorithm on a data set gets rank K.
inline RankMatrix rank_matrix(const ResultsTable& table) {
    detail::require_complete(table, "ranking");
    RankMatrix m;
    m.algorithms = table.algorithms();
    m.datasets = table.datasets();
    const std::size_t k = table.num_algorithms();
    m.mean_ranks.assign(k, 0.0);
    const double sign = table.direction() == Direction::higher_is_better ? 1.0 : -1.0;
    for (std::size_t d = 0; d < table.num_datasets(); ++d) {
        std::vector<double> v(k);
        for (std::size_t a = 0; a < k; ++a) v[a] = sign * table.mean(d, a);
        m.ranks.push_back(detail::average_ranks(v));
        for (std::size_t a = 0; a < k; ++a) m.mean_ranks[a] += m.ranks.back()[a];
    }
    for (auto& r : m.mean_ranks) r /= static_cast<double>(table.num_datasets());
    return m;
}

struct FriedmanResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
};

// Chi-square form with the tie correction in the denominator.
inline FriedmanResult friedman_test(const ResultsTable& table) {
    detail::require_complete(table, "Friedman test");
    const std::size_t k = table.num_algorithms(), n = table.num_datasets();
    if (k < 2) throw ConfigError("Friedman test needs at least 2 algorithms");
    if (n < 1) throw InsufficientDataError("Friedman test needs at least 1 data set");
    const double kd = static_cast<double>(k), nd = static_cast<double>(n);
    std::vector<double> col(k, 0.0);
    double tie_sum = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        std::vector<double> v(k);
        for (std::size_t a = 0; a < k; ++a) v[a] = table.mean(d, a);
        std::vector<std::size_t> ties;
        const auto r = detail::average_ranks(v, &ties);
        for (std::size_t a = 0; a < k; ++a) col[a] += r[a];
        for (auto t : ties) tie_sum += static_cast<double>(t * t * t - t);
    }
    double ss = 0.0;
    for (double c : col) ss += (c - nd * (kd + 1.0) / 2.0) * (c - nd * (kd + 1.0) / 2.0);
    const double denom = nd * kd * (kd + 1.0) - tie_sum / (kd - 1.0);
    FriedmanResult f;
    f.df = kd - 1.0;
    if (!(denom > 1e-12)) {
        f.degenerate = true;
        return f;
    }
    f.statistic = 12.0 * ss / denom;
    f.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(f.df), f.statistic));
    return f;
}

struct WilcoxonResult {
    double statistic = 0.0; // sum of ranks of positive differences
    double p_value = 1.0;
    std::size_t n = 0;      // non-zero differences
    bool exact = false;
    std::string note;
};

// Two-sided paired signed-rank test; zero differences are dropped.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw InsufficientDataError("signed-rank test needs two equally long, non-empty samples");
    std::vector<double> d, absd;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] - y[i] != 0.0) {
            d.push_back(x[i] - y[i]);
            absd.push_back(std::fabs(x[i] - y[i]));
        }
    WilcoxonResult r;
    r.n = d.size();
    if (d.empty()) {
        r.note = "all differences are zero";
        return r;
    }
    std::vector<std::size_t> ties;
    const auto ranks = detail::average_ranks(absd, &ties);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0) r.statistic += ranks[i];
    const bool tied = std::any_of(ties.begin(), ties.end(), [](std::size_t t) { return t > 1; });
    const std::size_t n = d.size();
    const double nd = static_cast<double>(n);
    if (n <= 25 && !tied) {
        // Counts of subsets of {1..n} by rank sum.
        const std::size_t max_sum = n * (n + 1) / 2;
        std::vector<double> count(max_sum + 1, 0.0);
        count[0] = 1.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t s = max_sum; s >= i; --s) count[s] += count[s - i];
        const double total = std::ldexp(1.0, static_cast<int>(n));
        const auto v = static_cast<std::size_t>(std::llround(r.statistic));
        double lower = 0.0, upper = 0.0;
        for (std::size_t s = 0; s <= max_sum; ++s) {
            if (s <= v) lower += count[s];
            if (s >= v) upper += count[s];
        }
        r.exact = true;
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        return r;
    }
    double tie_term = 0.0;
    for (auto t : ties) tie_term += static_cast<double>(t * t * t - t);
    double z = r.statistic - nd * (nd + 1.0) / 4.0;
    const double sigma = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0);
    if (!(sigma > 0)) {
        r.note = "zero variance";
        return r;
    }
    const double correction = z > 0 ? 0.5 : z < 0 ? -0.5 : 0.0;
    z = (z - correction) / sigma;
    const boost::math::normal norm;
    r.p_value = std::min(1.0, 2.0 * std::min(boost::math::cdf(norm, z),
                                             boost::math::cdf(boost::math::complement(norm, z))));
    if (tied) r.note = "normal approximation (tied absolute differences)";
    else r.note = "normal approximation";
    return r;
}

enum class PAdjust { none, bonferroni, holm, hochberg, bh, by };

inline PAdjust parse_p_adjust(std::string_view s) {
    if (s == "none") return PAdjust::none;
    if (s == "bonferroni") return PAdjust::bonferroni;
    if (s == "holm") return PAdjust::holm;
    if (s == "hochberg") return PAdjust::hochberg;
    if (s == "bh" || s == "BH" || s == "fdr") return PAdjust::bh;
    if (s == "by" || s == "BY") return PAdjust::by;
    throw ConfigError("unknown p-value adjustment '" + std::string(s) + "' (bonferroni, holm, hochberg, bh, by)");
}

inline const char* to_string(PAdjust m) {
    switch (m) {
    case PAdjust::none: return "none";
    case PAdjust::bonferroni: return "bonferroni";
    case PAdjust::holm: return "holm";
    case PAdjust::hochberg: return "hochberg";
    case PAdjust::bh: return "bh";
    case PAdjust::by: return "by";
    }
    return "?";
}

// Multiplicity-adjusted p-values, returned in input order.
inline std::vector<double> p_adjust(const std::vector<double>& p, PAdjust method) {
    const std::size_t n = p.size();
    std::vector<double> out(n);
    if (n == 0) return out;
    const double nd = static_cast<double>(n);
    if (method == PAdjust::none) return p;
    if (method == PAdjust::bonferroni) {
        for (std::size_t i = 0; i < n; ++i) out[i] = std::min(1.0, nd * p[i]);
        return out;
    }
    std::vector<std::size_t> o(n);
    std::iota(o.begin(), o.end(), 0);
    if (method == PAdjust::holm) {
        std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
        double run = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            run = std::max(run, (nd - static_cast<double>(r)) * p[o[r]]);
            out[o[r]] = std::min(1.0, run);
        }
        return out;
    }
    // Step-up methods walk from the largest p-value down; r is its rank
    // counted from the top (largest has i = n).
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    double q = 1.0;
    if (method == PAdjust::by)
        for (std::size_t i = 2; i <= n; ++i) q += 1.0 / static_cast<double>(i);
    double run = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
        const double i = nd - static_cast<double>(r);
        double v = 0.0;
        if (method == PAdjust::hochberg) v = (nd + 1.0 - i) * p[o[r]];
        else v = q * nd / i * p[o[r]];
        run = std::min(run, v);
        out[o[r]] = std::min(1.0, run);
    }
    return out;
}

// Friedman omnibus test, then Nemenyi critical difference on mean ranks.
inline FreqReport demsar_procedure(const ResultsTable& input, double alpha = 0.05) {
    const ResultsTable table = aggregate_folds(input);
    detail::require_complete(table, "Demsar procedure");
    const std::size_t k = table.num_algorithms(), n = table.num_datasets();
    if (k < 2) throw ConfigError("Demsar procedure needs at least 2 algorithms");
    FreqReport rep;
    rep.procedure = "demsar";
    rep.omnibus = "friedman";
    rep.alpha = alpha;
    rep.adjustment = "nemenyi";
    rep.ordering_by = "mean rank";
    const auto fr = friedman_test(table);
    rep.statistic = fr.statistic;
    rep.p_value = fr.p_value;
    if (fr.degenerate) rep.notes.push_back("all algorithms tie on every data set; no post-hoc test");

    const auto ranks = rank_matrix(table);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks.mean_ranks[a] > ranks.mean_ranks[b]; });
    for (auto a : order) {
        rep.ordering.push_back(table.algorithms()[a]);
        rep.ordering_values.push_back(ranks.mean_ranks[a]);
    }
    const bool post_hoc = !fr.degenerate && fr.p_value <= alpha;
    if (post_hoc) rep.critical_difference = nemenyi_cd(k, n, alpha);
    else if (!fr.degenerate) rep.notes.push_back("Friedman test not significant; no post-hoc test");
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            PairDecision pd;
            pd.first = order[a];
            pd.second = order[b];
            pd.first_name = table.algorithms()[pd.first];
            pd.second_name = table.algorithms()[pd.second];
            pd.statistic = ranks.mean_ranks[pd.first] - ranks.mean_ranks[pd.second];
            pd.significant = post_hoc && pd.statistic > *rep.critical_difference;
            rep.pairs.push_back(pd);
        }
    return rep;
}

// All pairwise signed-rank tests on per-data-set means, with p-value
// adjustment; algorithms ordered by median measure.
inline FreqReport pairwise_wilcoxon_procedure(const ResultsTable& input, PAdjust method = PAdjust::hochberg,
                                              double alpha = 0.05) {
    const ResultsTable table = aggregate_folds(input);
    detail::require_complete(table, "pairwise signed-rank procedure");
    const std::size_t k = table.num_algorithms(), n = table.num_datasets();
    if (k < 2) throw ConfigError("pairwise comparison needs at least 2 algorithms");
    FreqReport rep;
    rep.procedure = "pairwise-wilcoxon";
    rep.alpha = alpha;
    rep.adjustment = to_string(method);
    rep.ordering_by = "median measure";
    rep.notes.push_back("zero differences dropped before ranking");

    const bool higher = table.direction() == Direction::higher_is_better;
    std::vector<std::vector<double>> col(k, std::vector<double>(n));
    std::vector<double> med(k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t d = 0; d < n; ++d) col[a][d] = table.mean(d, a);
        auto s = col[a];
        std::sort(s.begin(), s.end());
        med[a] = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return higher ? med[a] > med[b] : med[a] < med[b]; });
    for (auto a : order) {
        rep.ordering.push_back(table.algorithms()[a]);
        rep.ordering_values.push_back(med[a]);
    }
    std::vector<double> raw;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            PairDecision pd;
            pd.first = order[a];
            pd.second = order[b];
            pd.first_name = table.algorithms()[pd.first];
            pd.second_name = table.algorithms()[pd.second];
            const auto w = wilcoxon_signed_rank(col[pd.first], col[pd.second]);
            pd.statistic = w.statistic;
            pd.p_raw = w.p_value;
            raw.push_back(w.p_value);
            rep.pairs.push_back(pd);
        }
    const auto adj = p_adjust(raw, method);
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        rep.pairs[i].p_adjusted = adj[i];
        rep.pairs[i].significant = adj[i] <= alpha;
    }
    return rep;
}

} // namespace bbt

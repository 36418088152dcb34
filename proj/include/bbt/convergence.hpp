#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbt/sampler.hpp"

namespace bbt {

struct ConvergenceThresholds {
    double max_rhat = 1.01;
    double min_ess = 400.0;
    std::size_t max_divergences = 0;
    // Shorter warmups leave adaptation incomplete and fail the verdict.
    std::size_t min_warmup = 100;
};

struct ParameterDiagnostics {
    std::string name;
    std::optional<double> rhat; // unavailable with a single chain
    double ess = 0.0;           // 0 when the draws are degenerate
};

struct ConvergenceReport {
    std::vector<ParameterDiagnostics> parameters;
    std::size_t divergences = 0;
    std::size_t max_depth_hits = 0;
    std::optional<double> max_rhat;
    double min_ess = 0.0;
    bool pass = false;
    std::vector<std::string> problems;
};

namespace detail {

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_var(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

// Autocovariance with divisor n for lags 0..max_lag.
inline std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    const double m = mean_of(x);
    std::vector<double> acov(max_lag + 1, 0.0);
    for (std::size_t lag = 0; lag <= max_lag && lag < n; ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - m) * (x[t + lag] - m);
        acov[lag] = s / static_cast<double>(n);
    }
    return acov;
}

// Each chain split into a first and second half (odd middle draw dropped).
inline std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> out;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
    return out;
}

} // namespace detail

// Split potential scale reduction. NaN for degenerate (zero-variance) draws.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
    const auto split = detail::split_chains(chains);
    const std::size_t m = split.size();
    const std::size_t n = split.front().size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = detail::mean_of(split[c]);
        vars[c] = detail::sample_var(split[c]);
    }
    const double w = detail::mean_of(vars);
    const double b = static_cast<double>(n) * detail::sample_var(means);
    if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double nd = static_cast<double>(n);
    const double var_plus = (nd - 1.0) / nd * w + b / nd;
    return std::sqrt(var_plus / w);
}

// Effective sample size over split chains: autocorrelations combined across
// chains, summed in pairs until the paired sum turns negative (Geyer's
// initial positive sequence, made monotone).
inline double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    const auto split = detail::split_chains(chains);
    const std::size_t m = split.size();
    const std::size_t n = split.front().size();
    if (n < 4) return 0.0;
    const double nd = static_cast<double>(n), md = static_cast<double>(m);

    std::vector<std::vector<double>> acov(m);
    std::vector<double> means(m);
    for (std::size_t c = 0; c < m; ++c) {
        acov[c] = detail::autocovariance(split[c], n - 1);
        means[c] = detail::mean_of(split[c]);
    }
    double mean_var = 0.0;
    for (std::size_t c = 0; c < m; ++c) mean_var += acov[c][0] * nd / (nd - 1.0);
    mean_var /= md;
    double var_plus = mean_var * (nd - 1.0) / nd;
    if (m > 1) var_plus += detail::sample_var(means);
    if (!(var_plus > 0.0) || !std::isfinite(var_plus)) return 0.0;

    auto mean_acov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t c = 0; c < m; ++c) s += acov[c][lag];
        return s / md;
    };

    std::vector<double> rho(n, 0.0);
    rho[0] = 1.0;
    double rho_even = 1.0;
    double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
    rho[1] = rho_odd;
    std::size_t t = 1;
    while (t + 2 < n - 4 && rho_even + rho_odd > 0) {
        rho_even = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
        rho_odd = 1.0 - (mean_var - mean_acov(t + 2)) / var_plus;
        if (rho_even + rho_odd >= 0) {
            rho[t + 1] = rho_even;
            rho[t + 2] = rho_odd;
        }
        t += 2;
    }
    const std::size_t max_t = t;
    if (rho_even > 0 && max_t + 1 < n) rho[max_t + 1] = rho_even;

    for (std::size_t s = 1; s + 4 <= max_t; s += 2) {
        if (rho[s + 1] + rho[s + 2] > rho[s - 1] + rho[s]) {
            rho[s + 1] = (rho[s - 1] + rho[s]) / 2.0;
            rho[s + 2] = rho[s + 1];
        }
    }

    const double total = md * nd;
    double tau = -1.0;
    for (std::size_t s = 0; s <= max_t; ++s) tau += 2.0 * rho[s];
    if (max_t + 1 < n) tau += rho[max_t + 1];
    tau = std::max(tau, 1.0 / std::log10(total));
    return total / tau;
}

inline ConvergenceReport convergence_report(const PosteriorDraws& draws,
                                            const ConvergenceThresholds& thresholds = {}) {
    ConvergenceReport report;
    report.divergences = draws.divergences();
    for (const auto& s : draws.stats) report.max_depth_hits += s.max_depth_hits;
    report.min_ess = std::numeric_limits<double>::infinity();
    bool rhat_bad = false, ess_bad = false;
    for (std::size_t p = 0; p < draws.dim; ++p) {
        std::vector<std::vector<double>> chains;
        for (std::size_t c = 0; c < draws.num_chains(); ++c) chains.push_back(draws.chain_param(c, p));
        ParameterDiagnostics d;
        d.name = draws.names[p];
        if (draws.num_chains() >= 2) {
            d.rhat = split_rhat(chains);
            if (!std::isfinite(*d.rhat)) {
                rhat_bad = true;
            } else {
                report.max_rhat = std::max(report.max_rhat.value_or(0.0), *d.rhat);
                if (!(*d.rhat < thresholds.max_rhat)) rhat_bad = true;
            }
        }
        d.ess = effective_sample_size(chains);
        if (!(d.ess > thresholds.min_ess)) ess_bad = true;
        report.min_ess = std::min(report.min_ess, d.ess);
        report.parameters.push_back(d);
    }
    if (draws.num_chains() < 2) report.problems.push_back("R-hat unavailable with a single chain");
    if (rhat_bad) report.problems.push_back("split R-hat not below threshold (or undefined) for some parameters");
    if (ess_bad) report.problems.push_back("effective sample size too low (or degenerate) for some parameters");
    if (report.divergences > thresholds.max_divergences)
        report.problems.push_back(std::to_string(report.divergences) + " divergent transitions");
    const bool short_warmup = draws.warmup < thresholds.min_warmup;
    if (short_warmup)
        report.problems.push_back("warmup of " + std::to_string(draws.warmup) + " iterations is below " +
                                  std::to_string(thresholds.min_warmup) + "; adaptation is incomplete");
    report.pass = !rhat_bad && !ess_bad && !short_warmup && report.divergences <= thresholds.max_divergences;
    return report;
}

} // namespace bbt

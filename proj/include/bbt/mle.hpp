#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bbt/error.hpp"
#include "bbt/wintable.hpp"

namespace bbt {

struct MleResult {
    std::vector<std::string> algorithms;
    std::vector<double> weights; // sum to 1
    std::size_t iterations = 0;
    bool converged = false;
    double log_likelihood = 0.0;
    std::vector<double> trace; // log-likelihood after each sweep

    double prob(std::size_t i, std::size_t j) const { return weights[i] / (weights[i] + weights[j]); }
};

// Bradley-Terry log-likelihood without the binomial coefficients.
inline double bt_log_likelihood(const WinTable& wt, const std::vector<double>& w) {
    double ll = 0.0;
    for (std::size_t i = 0; i < wt.size(); ++i)
        for (std::size_t j = 0; j < wt.size(); ++j)
            if (i != j && wt.wins(i, j) > 0)
                ll += static_cast<double>(wt.wins(i, j)) * std::log(w[i] / (w[i] + w[j]));
    return ll;
}

namespace detail {

// Every algorithm must reach every other along "beat" edges; otherwise some
// weight runs off to 0 or infinity.
inline void check_mle_identifiable(const WinTable& wt) {
    const std::size_t k = wt.size();
    const auto& names = wt.algorithms();
    const char* remedy = "; the maximum likelihood estimate does not exist (use the Bayesian fit, whose prior "
                         "regularizes this case)";
    for (std::size_t i = 0; i < k; ++i) {
        long losses = 0;
        for (std::size_t j = 0; j < k; ++j) losses += wt.wins(j, i);
        if (wt.total_wins(i) == 0) throw DegenerateMleError("algorithm '" + names[i] + "' never wins" + remedy);
        if (losses == 0) throw DegenerateMleError("algorithm '" + names[i] + "' never loses" + remedy);
    }
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<bool> seen(k, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < k; ++b) {
                const long edge = pass == 0 ? wt.wins(a, b) : wt.wins(b, a);
                if (!seen[b] && edge > 0) {
                    seen[b] = true;
                    stack.push_back(b);
                }
            }
        }
        for (std::size_t b = 0; b < k; ++b)
            if (!seen[b])
                throw DegenerateMleError("comparison graph is not strongly connected at algorithm '" + names[b] +
                                         "'" + remedy);
    }
}

} // namespace detail

// Minorize-maximize fixed point w_i <- W_i / sum_j N_ij / (w_i + w_j),
// updated for all i at once and renormalized each sweep.
inline MleResult mle_mm(const WinTable& wt, double tol = 1e-10, std::size_t max_iter = 10000) {
    if (wt.size() < 2) throw ConfigError("MLE needs at least 2 algorithms");
    if (wt.has_ties()) throw ConfigError("MLE needs a tie-free wintable; apply a ties policy first");
    detail::check_mle_identifiable(wt);
    const std::size_t k = wt.size();
    MleResult r;
    r.algorithms = wt.algorithms();
    r.weights.assign(k, 1.0 / static_cast<double>(k));
    std::vector<double> next(k);
    for (r.iterations = 0; r.iterations < max_iter;) {
        for (std::size_t i = 0; i < k; ++i) {
            double denom = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                if (j != i && wt.n(i, j) > 0)
                    denom += static_cast<double>(wt.n(i, j)) / (r.weights[i] + r.weights[j]);
            next[i] = static_cast<double>(wt.total_wins(i)) / denom;
        }
        double total = 0.0;
        for (double v : next) total += v;
        double change = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            next[i] /= total;
            change = std::max(change, std::fabs(next[i] - r.weights[i]));
        }
        r.weights = next;
        ++r.iterations;
        r.trace.push_back(bt_log_likelihood(wt, r.weights));
        if (change < tol) {
            r.converged = true;
            break;
        }
    }
    r.log_likelihood = bt_log_likelihood(wt, r.weights);
    return r;
}

} // namespace bbt

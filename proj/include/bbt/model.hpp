#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbt/error.hpp"
#include "bbt/wintable.hpp"

namespace bbt {

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// P(i beats j) = exp(beta_i) / (exp(beta_i) + exp(beta_j)). The value for
// the losing orientation is 1 - p of the winning one, so that
// pair_prob(a, b) + pair_prob(b, a) == 1 holds exactly.
inline double pair_prob(double beta_i, double beta_j) {
    const double x = beta_i - beta_j;
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    return 1.0 - pair_prob(beta_j, beta_i);
}

struct DavidsonProbs {
    double i_wins;
    double tie;
    double j_wins;
};

inline DavidsonProbs davidson_probs(double beta_i, double beta_j, double nu) {
    const double c = nu + 0.5 * (beta_i + beta_j);
    const double m = std::max({beta_i, beta_j, c});
    const double ea = std::exp(beta_i - m), eb = std::exp(beta_j - m), ec = std::exp(c - m);
    const double z = ea + eb + ec;
    return {ea / z, ec / z, eb / z};
}

enum class HyperPrior { lognormal, half_cauchy, half_normal };

// Hyper-prior on the merit scale sigma, plus the prior sd of the Davidson
// tie parameter.
struct PriorConfig {
    HyperPrior family = HyperPrior::lognormal;
    double scale = 0.5;
    double nu_prior_sd = 3.0;

    void validate() const {
        if (!(scale > 0) || !std::isfinite(scale)) throw ConfigError("hyper-prior scale must be > 0");
        if (!(nu_prior_sd > 0) || !std::isfinite(nu_prior_sd))
            throw ConfigError("nu prior sd must be > 0");
    }

    std::string describe() const {
        const char* name = family == HyperPrior::lognormal     ? "lognormal"
                           : family == HyperPrior::half_cauchy ? "cauchy"
                                                               : "normal";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s:%g", name, scale);
        return buf;
    }
};

// Accepts `lognormal:0.5`, `cauchy:1.0`, `normal:3.0`.
inline PriorConfig parse_hyper_prior(std::string_view spec) {
    PriorConfig p;
    const auto colon = spec.find(':');
    const auto name = spec.substr(0, colon);
    if (name == "lognormal") p.family = HyperPrior::lognormal;
    else if (name == "cauchy" || name == "half_cauchy") p.family = HyperPrior::half_cauchy;
    else if (name == "normal" || name == "half_normal") p.family = HyperPrior::half_normal;
    else throw ConfigError("unknown hyper-prior '" + std::string(name) + "' (lognormal, cauchy, normal)");
    if (colon != std::string_view::npos) {
        auto v = detail::parse_double(spec.substr(colon + 1));
        if (!v) throw ConfigError("bad hyper-prior scale in '" + std::string(spec) + "'");
        p.scale = *v;
    } else {
        p.scale = p.family == HyperPrior::lognormal ? 0.5 : p.family == HyperPrior::half_cauchy ? 1.0 : 3.0;
    }
    p.validate();
    return p;
}

namespace detail {

constexpr double log_sqrt_2pi = 0.91893853320467274178;

// Log density of sigma = exp(log_sigma) under the hyper-prior, including the
// Jacobian of the exp transform. Adds d/dlog_sigma to `grad`.
inline double hyper_log_density(double log_sigma, const PriorConfig& prior, double& grad) {
    const double s = prior.scale;
    switch (prior.family) {
    case HyperPrior::lognormal:
        grad += -log_sigma / (s * s);
        return -log_sqrt_2pi - std::log(s) - 0.5 * log_sigma * log_sigma / (s * s);
    case HyperPrior::half_cauchy: {
        const double r2 = std::exp(2.0 * (log_sigma - std::log(s)));
        grad += 1.0 - 2.0 * r2 / (1.0 + r2);
        return std::log(2.0 / (std::numbers::pi * s)) - std::log1p(r2) + log_sigma;
    }
    case HyperPrior::half_normal: {
        const double sigma = std::exp(log_sigma);
        grad += 1.0 - sigma * sigma / (s * s);
        return std::log(2.0) - log_sqrt_2pi - std::log(s) - 0.5 * sigma * sigma / (s * s) + log_sigma;
    }
    }
    return 0.0;
}

// Normal(0, sigma) log prior on every merit; adds gradients.
inline double merit_log_prior(std::span<const double> beta, double log_sigma, std::span<double> grad_beta,
                              double& grad_log_sigma) {
    const double inv_var = std::exp(-2.0 * log_sigma);
    double lp = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        const double b2 = beta[i] * beta[i] * inv_var;
        lp += -log_sqrt_2pi - log_sigma - 0.5 * b2;
        grad_beta[i] += -beta[i] * inv_var;
        grad_log_sigma += b2 - 1.0;
    }
    return lp;
}

} // namespace detail

// A log-density with analytic gradient over an unconstrained vector.
class LogDensity {
public:
    virtual ~LogDensity() = default;
    virtual std::size_t dim() const = 0;
    virtual double operator()(std::span<const double> x, std::span<double> grad) const = 0;
};

struct BTParams {
    std::vector<double> beta;
    double log_sigma = 0.0;

    std::vector<double> packed() const {
        std::vector<double> v = beta;
        v.push_back(log_sigma);
        return v;
    }
};

struct DavidsonParams {
    std::vector<double> beta;
    double nu = 0.0;
    double log_sigma = 0.0;

    std::vector<double> packed() const {
        std::vector<double> v = beta;
        v.push_back(nu);
        v.push_back(log_sigma);
        return v;
    }
};

enum class ModelKind { bradley_terry, davidson };

// Per unordered pair observed counts, precomputed from a wintable.
struct PairCounts {
    std::size_t i, j;
    long wins_ij, wins_ji, ties;
    double log_coef; // log multinomial coefficient

    long n() const { return wins_ij + wins_ji + ties; }
};

inline std::vector<PairCounts> observed_pairs(const WinTable& wt) {
    std::vector<PairCounts> pairs;
    for (std::size_t i = 0; i < wt.size(); ++i)
        for (std::size_t j = i + 1; j < wt.size(); ++j) {
            const long n = wt.n(i, j);
            if (n == 0) continue;
            const double coef = std::lgamma(static_cast<double>(n) + 1.0) -
                                std::lgamma(static_cast<double>(wt.wins(i, j)) + 1.0) -
                                std::lgamma(static_cast<double>(wt.wins(j, i)) + 1.0) -
                                std::lgamma(static_cast<double>(wt.ties(i, j)) + 1.0);
            pairs.push_back({i, j, wt.wins(i, j), wt.wins(j, i), wt.ties(i, j), coef});
        }
    return pairs;
}

// Hierarchical Bradley-Terry posterior. Layout: [beta_1..beta_K, log_sigma].
// Pair terms are full binomial log-probabilities.
class BradleyTerryModel : public LogDensity {
public:
    BradleyTerryModel(const WinTable& wt, PriorConfig prior)
        : k_(wt.size()), prior_(prior), pairs_(observed_pairs(wt)) {
        prior_.validate();
        if (k_ < 2) throw ConfigError("the model needs at least 2 algorithms");
        if (wt.has_ties())
            throw ConfigError("the Bradley-Terry model needs a tie-free wintable; apply a ties policy "
                              "(add, spread or forget) or use the Davidson model");
    }

    std::size_t dim() const override { return k_ + 1; }
    std::size_t num_algorithms() const { return k_; }
    const std::vector<PairCounts>& pairs() const { return pairs_; }
    const PriorConfig& prior() const { return prior_; }

    double pair_log_lik(const PairCounts& p, std::span<const double> x) const {
        const double d = x[p.i] - x[p.j];
        return p.log_coef - static_cast<double>(p.wins_ij) * softplus(-d) -
               static_cast<double>(p.wins_ji) * softplus(d);
    }

    double log_likelihood(std::span<const double> x) const {
        double ll = 0.0;
        for (const auto& p : pairs_) ll += pair_log_lik(p, x);
        return ll;
    }

    double operator()(std::span<const double> x, std::span<double> grad) const override {
        std::fill(grad.begin(), grad.end(), 0.0);
        double lp = 0.0;
        for (const auto& p : pairs_) {
            const double d = x[p.i] - x[p.j];
            lp += p.log_coef - static_cast<double>(p.wins_ij) * softplus(-d) -
                  static_cast<double>(p.wins_ji) * softplus(d);
            const double prob = pair_prob(x[p.i], x[p.j]);
            const double g = static_cast<double>(p.wins_ij) - static_cast<double>(p.n()) * prob;
            grad[p.i] += g;
            grad[p.j] -= g;
        }
        const double log_sigma = x[k_];
        lp += detail::merit_log_prior(x.first(k_), log_sigma, grad.first(k_), grad[k_]);
        lp += detail::hyper_log_density(log_sigma, prior_, grad[k_]);
        return lp;
    }

private:
    std::size_t k_;
    PriorConfig prior_;
    std::vector<PairCounts> pairs_;
};

// Davidson tie model. Layout: [beta_1..beta_K, nu, log_sigma]. Pair terms
// are full trinomial log-probabilities.
class DavidsonModel : public LogDensity {
public:
    DavidsonModel(const WinTable& wt, PriorConfig prior)
        : k_(wt.size()), prior_(prior), pairs_(observed_pairs(wt)) {
        prior_.validate();
        if (k_ < 2) throw ConfigError("the model needs at least 2 algorithms");
    }

    std::size_t dim() const override { return k_ + 2; }
    std::size_t num_algorithms() const { return k_; }
    const std::vector<PairCounts>& pairs() const { return pairs_; }
    const PriorConfig& prior() const { return prior_; }

    double pair_log_lik(const PairCounts& p, std::span<const double> x) const {
        const double a = x[p.i], b = x[p.j], c = x[k_] + 0.5 * (a + b);
        const double lse = log_sum_exp3(a, b, c);
        return p.log_coef + static_cast<double>(p.wins_ij) * (a - lse) +
               static_cast<double>(p.wins_ji) * (b - lse) + static_cast<double>(p.ties) * (c - lse);
    }

    double log_likelihood(std::span<const double> x) const {
        double ll = 0.0;
        for (const auto& p : pairs_) ll += pair_log_lik(p, x);
        return ll;
    }

    double operator()(std::span<const double> x, std::span<double> grad) const override {
        std::fill(grad.begin(), grad.end(), 0.0);
        double lp = 0.0;
        for (const auto& p : pairs_) {
            lp += pair_log_lik(p, x);
            const auto pr = davidson_probs(x[p.i], x[p.j], x[k_]);
            const double n = static_cast<double>(p.n());
            const double t = static_cast<double>(p.ties);
            grad[p.i] += static_cast<double>(p.wins_ij) + 0.5 * t - n * (pr.i_wins + 0.5 * pr.tie);
            grad[p.j] += static_cast<double>(p.wins_ji) + 0.5 * t - n * (pr.j_wins + 0.5 * pr.tie);
            grad[k_] += t - n * pr.tie;
        }
        const double nu = x[k_];
        const double sd = prior_.nu_prior_sd;
        lp += -detail::log_sqrt_2pi - std::log(sd) - 0.5 * nu * nu / (sd * sd);
        grad[k_] += -nu / (sd * sd);
        const double log_sigma = x[k_ + 1];
        lp += detail::merit_log_prior(x.first(k_), log_sigma, grad.first(k_), grad[k_ + 1]);
        lp += detail::hyper_log_density(log_sigma, prior_, grad[k_ + 1]);
        return lp;
    }

private:
    static double log_sum_exp3(double a, double b, double c) {
        const double m = std::max({a, b, c});
        return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
    }

    std::size_t k_;
    PriorConfig prior_;
    std::vector<PairCounts> pairs_;
};

struct DensityValue {
    double log_density;
    std::vector<double> gradient;
};

inline DensityValue bt_log_posterior(const BTParams& params, const WinTable& wt, const PriorConfig& prior) {
    BradleyTerryModel model(wt, prior);
    const auto x = params.packed();
    std::vector<double> grad(x.size());
    const double lp = model(x, grad);
    return {lp, std::move(grad)};
}

inline DensityValue davidson_log_posterior(const DavidsonParams& params, const WinTable& wt,
                                           const PriorConfig& prior) {
    DavidsonModel model(wt, prior);
    const auto x = params.packed();
    std::vector<double> grad(x.size());
    const double lp = model(x, grad);
    return {lp, std::move(grad)};
}

} // namespace bbt

#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bbt/error.hpp"
#include "bbt/random.hpp"

namespace bbt {

struct SamplerConfig {
    std::size_t chains = 4;
    std::size_t warmup = 1000;
    std::size_t draws = 1000;
    std::uint64_t seed = 42;
    double target_accept = 0.8;
    int max_depth = 10;
    // Energy error above which a transition counts as divergent.
    double max_energy_error = 1000.0;
    // Run chains on separate threads. Output does not depend on it.
    bool parallel = true;

    void validate() const {
        if (chains < 1) throw ConfigError("chains must be >= 1");
        if (draws < 1) throw ConfigError("draws must be >= 1");
        if (!(target_accept > 0.0 && target_accept < 1.0))
            throw ConfigError("target_accept must be in (0, 1)");
        if (max_depth < 1 || max_depth > 20) throw ConfigError("max_depth must be in [1, 20]");
    }
};

struct ChainStats {
    double step_size = 0.0;
    std::vector<double> inv_metric;
    double mean_accept = 0.0;
    std::size_t divergences = 0;
    std::size_t max_depth_hits = 0;
    double mean_leapfrog = 0.0;
};

// Post-warmup draws. chains[c] is row-major (draws x dim).
struct PosteriorDraws {
    std::vector<std::string> names;
    std::size_t dim = 0;
    std::size_t draws = 0;
    std::size_t warmup = 0;
    std::vector<std::vector<double>> chains;
    std::vector<ChainStats> stats;

    std::size_t num_chains() const { return chains.size(); }
    std::size_t total_draws() const { return draws * chains.size(); }
    double at(std::size_t chain, std::size_t draw, std::size_t param) const {
        return chains[chain][draw * dim + param];
    }
    std::span<const double> row(std::size_t chain, std::size_t draw) const {
        return std::span<const double>(chains[chain]).subspan(draw * dim, dim);
    }
    std::vector<double> chain_param(std::size_t chain, std::size_t param) const {
        std::vector<double> v(draws);
        for (std::size_t d = 0; d < draws; ++d) v[d] = at(chain, d, param);
        return v;
    }
    // Chains concatenated in chain order.
    std::vector<double> pooled(std::size_t param) const {
        std::vector<double> v;
        v.reserve(total_draws());
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (std::size_t d = 0; d < draws; ++d) v.push_back(at(c, d, param));
        return v;
    }
    std::size_t divergences() const {
        std::size_t n = 0;
        for (const auto& s : stats) n += s.divergences;
        return n;
    }
};

using InitFn = std::function<std::vector<double>(Rng&)>;

namespace detail {

inline double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

struct PhasePoint {
    std::vector<double> q, p, g;
    double log_density = 0.0;
};

// Nesterov dual averaging of the log step size.
class StepSizeAdaptation {
public:
    void set_mu(double mu) { mu_ = mu; }
    void set_delta(double delta) { delta_ = delta; }
    void restart() {
        counter_ = 0;
        s_bar_ = 0;
        x_bar_ = 0;
    }
    void learn(double& epsilon, double accept) {
        ++counter_;
        accept = std::min(1.0, accept);
        const double eta = 1.0 / (counter_ + t0_);
        s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept);
        const double x = mu_ - s_bar_ * std::sqrt(counter_) / gamma_;
        const double x_eta = std::pow(counter_, -kappa_);
        x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
        epsilon = std::exp(x);
    }
    void complete(double& epsilon) const { epsilon = std::exp(x_bar_); }

private:
    double counter_ = 0, s_bar_ = 0, x_bar_ = 0;
    double mu_ = 0.5, delta_ = 0.8;
    double gamma_ = 0.05, kappa_ = 0.75, t0_ = 10;
};

// Diagonal metric estimation over an initial buffer, doubling slow windows
// and a terminal buffer.
class MetricAdaptation {
public:
    MetricAdaptation(std::size_t dim, std::size_t warmup) : warmup_(warmup), mean_(dim), m2_(dim) {
        std::size_t init = 75, term = 50, base = 25;
        if (warmup < 20) {
            enabled_ = false;
        } else if (init + term + base > warmup) {
            init = static_cast<std::size_t>(0.15 * static_cast<double>(warmup));
            term = static_cast<std::size_t>(0.1 * static_cast<double>(warmup));
            base = warmup - (init + term);
        }
        init_ = init;
        term_ = term;
        window_size_ = base;
        next_window_ = init + base - 1;
    }

    // Returns true when a window closed and `inv_metric` was updated.
    bool learn(std::vector<double>& inv_metric, std::span<const double> q) {
        if (!enabled_) return false;
        if (in_window()) add(q);
        if (end_of_window()) {
            compute_next_window();
            const double n = static_cast<double>(count_);
            for (std::size_t i = 0; i < inv_metric.size(); ++i) {
                const double var = count_ > 1 ? m2_[i] / (n - 1.0) : 1.0;
                inv_metric[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
            }
            count_ = 0;
            std::fill(mean_.begin(), mean_.end(), 0.0);
            std::fill(m2_.begin(), m2_.end(), 0.0);
            ++counter_;
            return true;
        }
        ++counter_;
        return false;
    }

private:
    bool in_window() const {
        return counter_ >= init_ && counter_ < warmup_ - term_ && counter_ != warmup_;
    }
    bool end_of_window() const { return counter_ == next_window_ && counter_ != warmup_; }
    void compute_next_window() {
        if (next_window_ == warmup_ - term_ - 1) return;
        window_size_ *= 2;
        next_window_ = counter_ + window_size_;
        if (next_window_ != warmup_ - term_ - 1) {
            const std::size_t boundary = next_window_ + 2 * window_size_;
            if (boundary >= warmup_ - term_ - 1) next_window_ = warmup_ - term_ - 1;
        }
    }
    void add(std::span<const double> q) {
        ++count_;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double delta = q[i] - mean_[i];
            mean_[i] += delta / static_cast<double>(count_);
            m2_[i] += delta * (q[i] - mean_[i]);
        }
    }

    bool enabled_ = true;
    std::size_t warmup_, init_ = 0, term_ = 0, window_size_ = 0, next_window_ = 0;
    std::size_t counter_ = 0, count_ = 0;
    std::vector<double> mean_, m2_;
};

struct Transition {
    double accept = 0.0;
    int depth = 0;
    std::size_t leapfrogs = 0;
    bool divergent = false;
};

// Multinomial no-U-turn sampler with a diagonal Euclidean metric.
template <class Density>
class Nuts {
public:
    Nuts(const Density& density, std::size_t dim, Rng& rng, int max_depth, double max_energy_error)
        : density_(density), dim_(dim), rng_(rng), max_depth_(max_depth),
          max_energy_error_(max_energy_error) {
        inv_metric.assign(dim, 1.0);
        z_.q.assign(dim, 0.0);
        z_.p.assign(dim, 0.0);
        z_.g.assign(dim, 0.0);
    }

    double step_size = 1.0;
    std::vector<double> inv_metric;

    void set_position(std::span<const double> q) {
        z_.q.assign(q.begin(), q.end());
        evaluate(z_);
    }
    const PhasePoint& state() const { return z_; }

    // Doubles or halves the step size until a single leapfrog step crosses
    // an acceptance probability of 0.8.
    void init_step_size() {
        const PhasePoint start = z_;
        sample_momentum(z_);
        double h0 = hamiltonian(z_);
        leapfrog(z_, step_size);
        double delta = h0 - hamiltonian(z_);
        if (std::isnan(delta)) delta = -std::numeric_limits<double>::infinity();
        const int direction = delta > std::log(0.8) ? 1 : -1;
        for (int iter = 0; iter < 200; ++iter) {
            z_ = start;
            sample_momentum(z_);
            h0 = hamiltonian(z_);
            leapfrog(z_, step_size);
            delta = h0 - hamiltonian(z_);
            if (std::isnan(delta)) delta = -std::numeric_limits<double>::infinity();
            if (direction == 1 && !(delta > std::log(0.8))) break;
            if (direction == -1 && !(delta < std::log(0.8))) break;
            step_size = direction == 1 ? 2.0 * step_size : 0.5 * step_size;
            if (step_size > 1e7 || step_size < 1e-12) break;
        }
        z_ = start;
    }

    Transition transition() {
        sample_momentum(z_);
        const double h0 = hamiltonian(z_);

        PhasePoint z_fwd = z_, z_bck = z_, z_sample = z_, z_propose = z_;
        std::vector<double> p_fwd = z_.p, p_bck = z_.p;
        std::vector<double> sharp_fwd = sharp(z_.p), sharp_bck = sharp_fwd;
        std::vector<double> rho = z_.p;

        double log_sum_weight = 0.0;
        double sum_metro_prob = 0.0;
        std::size_t n_leapfrog = 0;
        int depth = 0;
        divergent_ = false;

        while (depth < max_depth_) {
            std::vector<double> rho_sub(dim_, 0.0), sub_sharp_beg(dim_), sub_sharp_end(dim_),
                sub_p_beg(dim_), sub_p_end(dim_);
            double lsw_sub = -std::numeric_limits<double>::infinity();
            const bool forward = rng_.uniform() > 0.5;
            z_ = forward ? z_fwd : z_bck;
            const bool valid = build_tree(depth, z_propose, sub_sharp_beg, sub_sharp_end, rho_sub, sub_p_beg,
                                          sub_p_end, h0, forward ? 1.0 : -1.0, n_leapfrog, lsw_sub,
                                          sum_metro_prob);
            (forward ? z_fwd : z_bck) = z_;
            if (!valid) break;
            ++depth;

            if (lsw_sub > log_sum_weight) {
                z_sample = z_propose;
            } else if (rng_.uniform() < std::exp(lsw_sub - log_sum_weight)) {
                z_sample = z_propose;
            }
            log_sum_weight = log_add_exp(log_sum_weight, lsw_sub);

            // Old trajectory is adjacent to the new subtree at its near end.
            auto& near_p = forward ? p_fwd : p_bck;
            auto& near_sharp = forward ? sharp_fwd : sharp_bck;
            const auto& far_sharp = forward ? sharp_bck : sharp_fwd;

            std::vector<double> rho_total(dim_), ext_old(dim_), ext_new(dim_);
            for (std::size_t i = 0; i < dim_; ++i) {
                rho_total[i] = rho[i] + rho_sub[i];
                ext_old[i] = rho[i] + sub_p_beg[i];
                ext_new[i] = rho_sub[i] + near_p[i];
            }
            bool persist = no_u_turn(far_sharp, sub_sharp_end, rho_total);
            persist = persist && no_u_turn(far_sharp, sub_sharp_beg, ext_old);
            persist = persist && no_u_turn(near_sharp, sub_sharp_end, ext_new);

            rho = rho_total;
            near_p = sub_p_end;
            near_sharp = sub_sharp_end;
            if (!persist) break;
        }

        z_ = z_sample;
        Transition t;
        t.depth = depth;
        t.leapfrogs = n_leapfrog;
        t.divergent = divergent_;
        t.accept = n_leapfrog > 0 ? sum_metro_prob / static_cast<double>(n_leapfrog) : 0.0;
        return t;
    }

    // Integrates n leapfrog steps of size eps from the current state with
    // the given momentum; used by reversibility checks.
    void integrate(std::vector<double>& q, std::vector<double>& p, double eps, std::size_t n) {
        PhasePoint z;
        z.q = q;
        z.p = p;
        z.g.assign(dim_, 0.0);
        evaluate(z);
        for (std::size_t s = 0; s < n; ++s) leapfrog(z, eps);
        q = z.q;
        p = z.p;
    }

private:
    void evaluate(PhasePoint& z) const {
        z.log_density = density_(std::span<const double>(z.q), std::span<double>(z.g));
        if (std::isnan(z.log_density)) z.log_density = -std::numeric_limits<double>::infinity();
    }

    double hamiltonian(const PhasePoint& z) const {
        double k = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) k += z.p[i] * z.p[i] * inv_metric[i];
        return -z.log_density + 0.5 * k;
    }

    std::vector<double> sharp(const std::vector<double>& p) const {
        std::vector<double> s(dim_);
        for (std::size_t i = 0; i < dim_; ++i) s[i] = inv_metric[i] * p[i];
        return s;
    }

    void sample_momentum(PhasePoint& z) {
        for (std::size_t i = 0; i < dim_; ++i) z.p[i] = rng_.normal() / std::sqrt(inv_metric[i]);
    }

    void leapfrog(PhasePoint& z, double eps) const {
        for (std::size_t i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps * z.g[i];
        for (std::size_t i = 0; i < dim_; ++i) z.q[i] += eps * inv_metric[i] * z.p[i];
        evaluate(z);
        for (std::size_t i = 0; i < dim_; ++i) z.p[i] += 0.5 * eps * z.g[i];
    }

    static bool no_u_turn(const std::vector<double>& sharp_minus, const std::vector<double>& sharp_plus,
                          const std::vector<double>& rho) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            a += sharp_minus[i] * rho[i];
            b += sharp_plus[i] * rho[i];
        }
        return a > 0 && b > 0;
    }

    bool build_tree(int depth, PhasePoint& z_propose, std::vector<double>& sharp_beg,
                    std::vector<double>& sharp_end, std::vector<double>& rho, std::vector<double>& p_beg,
                    std::vector<double>& p_end, double h0, double sign, std::size_t& n_leapfrog,
                    double& log_sum_weight, double& sum_metro_prob) {
        if (depth == 0) {
            leapfrog(z_, sign * step_size);
            ++n_leapfrog;
            double h = hamiltonian(z_);
            if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
            if (h - h0 > max_energy_error_) divergent_ = true;
            log_sum_weight = log_add_exp(log_sum_weight, h0 - h);
            sum_metro_prob += h0 - h > 0 ? 1.0 : std::exp(h0 - h);
            z_propose = z_;
            sharp_beg = sharp(z_.p);
            sharp_end = sharp_beg;
            for (std::size_t i = 0; i < dim_; ++i) rho[i] += z_.p[i];
            p_beg = z_.p;
            p_end = p_beg;
            return !divergent_;
        }

        std::vector<double> sharp_left_end(dim_), p_left_end(dim_), rho_left(dim_, 0.0);
        double lsw_left = -std::numeric_limits<double>::infinity();
        if (!build_tree(depth - 1, z_propose, sharp_beg, sharp_left_end, rho_left, p_beg, p_left_end, h0, sign,
                        n_leapfrog, lsw_left, sum_metro_prob))
            return false;

        PhasePoint z_propose_right = z_;
        std::vector<double> sharp_right_beg(dim_), p_right_beg(dim_), rho_right(dim_, 0.0);
        double lsw_right = -std::numeric_limits<double>::infinity();
        if (!build_tree(depth - 1, z_propose_right, sharp_right_beg, sharp_end, rho_right, p_right_beg, p_end, h0,
                        sign, n_leapfrog, lsw_right, sum_metro_prob))
            return false;

        const double lsw_subtree = log_add_exp(lsw_left, lsw_right);
        log_sum_weight = log_add_exp(log_sum_weight, lsw_subtree);
        if (lsw_right > lsw_subtree) {
            z_propose = z_propose_right;
        } else if (rng_.uniform() < std::exp(lsw_right - lsw_subtree)) {
            z_propose = z_propose_right;
        }

        std::vector<double> rho_subtree(dim_), ext(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            rho_subtree[i] = rho_left[i] + rho_right[i];
            rho[i] += rho_subtree[i];
        }
        bool persist = no_u_turn(sharp_beg, sharp_end, rho_subtree);
        for (std::size_t i = 0; i < dim_; ++i) ext[i] = rho_left[i] + p_right_beg[i];
        persist = persist && no_u_turn(sharp_beg, sharp_right_beg, ext);
        for (std::size_t i = 0; i < dim_; ++i) ext[i] = rho_right[i] + p_left_end[i];
        persist = persist && no_u_turn(sharp_left_end, sharp_end, ext);
        return persist;
    }

    const Density& density_;
    std::size_t dim_;
    Rng& rng_;
    int max_depth_;
    double max_energy_error_;
    PhasePoint z_;
    bool divergent_ = false;
};

template <class Density>
void run_chain(const Density& density, std::size_t dim, const SamplerConfig& config, std::size_t chain,
               const InitFn& init, std::vector<double>& out, ChainStats& stats) {
    Rng rng(derive_seed(config.seed, chain));
    Nuts<Density> nuts(density, dim, rng, config.max_depth, config.max_energy_error);

    std::vector<double> grad(dim);
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        std::vector<double> q;
        if (init) {
            q = init(rng);
        } else {
            q.resize(dim);
            for (auto& v : q) v = rng.uniform(-0.1, 0.1);
        }
        if (q.size() != dim) throw ConfigError("initializer returned a vector of the wrong size");
        const double lp = density(std::span<const double>(q), std::span<double>(grad));
        ok = std::isfinite(lp);
        for (double g : grad) ok = ok && std::isfinite(g);
        if (ok) nuts.set_position(q);
    }
    if (!ok) throw SamplingError("chain " + std::to_string(chain) + ": density not finite at initialization");

    StepSizeAdaptation step;
    step.set_delta(config.target_accept);
    MetricAdaptation metric(dim, config.warmup);
    if (config.warmup > 0) {
        nuts.init_step_size();
        step.set_mu(std::log(10.0 * nuts.step_size));
        step.restart();
    }

    for (std::size_t it = 0; it < config.warmup; ++it) {
        const auto t = nuts.transition();
        step.learn(nuts.step_size, t.accept);
        if (metric.learn(nuts.inv_metric, nuts.state().q)) {
            nuts.init_step_size();
            step.set_mu(std::log(10.0 * nuts.step_size));
            step.restart();
        }
    }
    if (config.warmup > 0) step.complete(nuts.step_size);

    out.assign(config.draws * dim, 0.0);
    double accept_sum = 0.0, leapfrog_sum = 0.0;
    for (std::size_t it = 0; it < config.draws; ++it) {
        const auto t = nuts.transition();
        accept_sum += t.accept;
        leapfrog_sum += static_cast<double>(t.leapfrogs);
        if (t.divergent) ++stats.divergences;
        if (t.depth >= config.max_depth) ++stats.max_depth_hits;
        const auto& q = nuts.state().q;
        std::copy(q.begin(), q.end(), out.begin() + static_cast<std::ptrdiff_t>(it * dim));
    }
    if (stats.divergences == config.draws)
        throw SamplingError("chain " + std::to_string(chain) + ": every transition diverged");
    stats.step_size = nuts.step_size;
    stats.inv_metric = nuts.inv_metric;
    stats.mean_accept = accept_sum / static_cast<double>(config.draws);
    stats.mean_leapfrog = leapfrog_sum / static_cast<double>(config.draws);
}

} // namespace detail

// Draws from the density `f(x, grad) -> log p(x)` (up to a constant) with
// NUTS. Chains use RNG streams derived from (seed, chain index), so the
// result is the same whether chains run serially or on threads.
template <class Density>
PosteriorDraws sample(const Density& density, std::size_t dim, const SamplerConfig& config,
                      std::vector<std::string> names = {}, const InitFn& init = {}) {
    config.validate();
    if (dim == 0) throw ConfigError("dimension must be >= 1");
    if (names.empty())
        for (std::size_t i = 0; i < dim; ++i) names.push_back("x[" + std::to_string(i) + "]");
    if (names.size() != dim) throw ConfigError("parameter name count does not match dimension");

    PosteriorDraws result;
    result.names = std::move(names);
    result.dim = dim;
    result.draws = config.draws;
    result.warmup = config.warmup;
    result.chains.resize(config.chains);
    result.stats.resize(config.chains);

    std::vector<std::exception_ptr> errors(config.chains);
    auto work = [&](std::size_t c) {
        try {
            detail::run_chain(density, dim, config, c, init, result.chains[c], result.stats[c]);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };
    if (config.parallel && config.chains > 1) {
        std::vector<std::thread> threads;
        for (std::size_t c = 0; c < config.chains; ++c) threads.emplace_back(work, c);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t c = 0; c < config.chains; ++c) work(c);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return result;
}

} // namespace bbt

#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace bbt;

namespace {

struct StdNormal {
    double operator()(std::span<const double> x, std::span<double> g) const {
        double lp = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            lp -= 0.5 * x[i] * x[i];
            g[i] = -x[i];
        }
        return lp;
    }
};

struct CorrelatedNormal {
    double rho = 0.9;
    double operator()(std::span<const double> x, std::span<double> g) const {
        const double c = 1.0 / (1.0 - rho * rho);
        g[0] = -c * (x[0] - rho * x[1]);
        g[1] = -c * (x[1] - rho * x[0]);
        return -0.5 * c * (x[0] * x[0] - 2 * rho * x[0] * x[1] + x[1] * x[1]);
    }
};

SamplerConfig config(std::uint64_t seed) {
    SamplerConfig c;
    c.seed = seed;
    return c;
}

} // namespace

TEST(Sampler, StandardNormalMoments) {
    const auto d = sample(StdNormal{}, 1, config(1));
    const auto v = d.pooled(0);
    ASSERT_EQ(v.size(), 4000u);
    double m = 0, s2 = 0;
    for (double x : v) m += x;
    m /= 4000.0;
    for (double x : v) s2 += (x - m) * (x - m);
    EXPECT_NEAR(m, 0.0, 0.05);
    EXPECT_NEAR(std::sqrt(s2 / 3999.0), 1.0, 0.05);
    EXPECT_EQ(d.divergences(), 0u);
}

TEST(Sampler, CorrelatedNormal) {
    const auto d = sample(CorrelatedNormal{}, 2, config(2));
    const auto x = d.pooled(0), y = d.pooled(1);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    EXPECT_NEAR(sxy / std::sqrt(sxx * syy), 0.9, 0.05);
}

TEST(Sampler, DeterministicAcrossThreading) {
    SamplerConfig c = config(99);
    c.warmup = 200;
    c.draws = 200;
    c.parallel = true;
    const auto a = sample(CorrelatedNormal{}, 2, c);
    c.parallel = false;
    const auto b = sample(CorrelatedNormal{}, 2, c);
    const auto again = sample(CorrelatedNormal{}, 2, c);
    EXPECT_EQ(a.chains, b.chains);
    EXPECT_EQ(b.chains, again.chains);
    c.seed = 100;
    EXPECT_NE(sample(CorrelatedNormal{}, 2, c).chains, a.chains);
}

TEST(Sampler, ChainsDiffer) {
    const auto d = sample(StdNormal{}, 1, config(4));
    EXPECT_NE(d.chains[0], d.chains[1]);
    EXPECT_EQ(d.chains[0].size(), 1000u);
}

TEST(Sampler, ConfigValidation) {
    SamplerConfig c;
    c.chains = 0;
    EXPECT_THROW(sample(StdNormal{}, 1, c), ConfigError);
    c = SamplerConfig{};
    c.draws = 0;
    EXPECT_THROW(sample(StdNormal{}, 1, c), ConfigError);
    c = SamplerConfig{};
    c.target_accept = 1.0;
    EXPECT_THROW(sample(StdNormal{}, 1, c), ConfigError);
}

TEST(Sampler, NonFiniteInitialDensityFails) {
    auto bad = [](std::span<const double>, std::span<double> g) {
        g[0] = 0;
        return -std::numeric_limits<double>::infinity();
    };
    SamplerConfig c = config(1);
    c.warmup = 10;
    c.draws = 10;
    EXPECT_THROW(sample(bad, 1, c), SamplingError);
}

TEST(Sampler, NonFiniteRegionRejected) {
    // Half-normal on x > 0 written with -inf outside the support.
    auto half = [](std::span<const double> x, std::span<double> g) {
        g[0] = -x[0];
        return x[0] > 0 ? -0.5 * x[0] * x[0] : -std::numeric_limits<double>::infinity();
    };
    SamplerConfig c = config(3);
    const auto d = sample(half, 1, c, {}, [](Rng& r) { return std::vector<double>{r.uniform(0.5, 1.0)}; });
    for (double v : d.pooled(0)) EXPECT_GT(v, 0.0);
}

TEST(Sampler, LeapfrogReversible) {
    CorrelatedNormal f;
    Rng rng(8);
    detail::Nuts<CorrelatedNormal> nuts(f, 2, rng, 10, 1000.0);
    nuts.inv_metric = {0.7, 1.3};
    std::vector<double> q{0.3, -1.2}, p{0.8, 0.1};
    const auto q0 = q, p0 = p;
    nuts.integrate(q, p, 0.1, 50);
    for (auto& v : p) v = -v;
    nuts.integrate(q, p, 0.1, 50);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(q[i], q0[i], 1e-8);
        EXPECT_NEAR(-p[i], p0[i], 1e-8);
    }
}

TEST(Sampler, PosteriorRecovery) {
    const std::vector<double> truth{-0.8, -0.3, 0.0, 0.4, 0.7};
    std::size_t covered = 0, total = 0;
    for (std::uint64_t rep = 0; rep < 40; ++rep) {
        Rng rng(derive_seed(2024, rep));
        WinTable wt({"a", "b", "c", "d", "e"});
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j) {
                const long w = rng.binomial(200, pair_prob(truth[i], truth[j]));
                wt.set(i, j, w, 200 - w, 0);
            }
        SamplerConfig c = config(derive_seed(77, rep));
        c.warmup = 500;
        c.draws = 500;
        const auto fit = fit_bt(wt, {}, c);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j) {
                std::vector<double> diff;
                for (std::size_t ch = 0; ch < fit.draws.num_chains(); ++ch)
                    for (std::size_t d = 0; d < fit.draws.draws; ++d)
                        diff.push_back(fit.draws.at(ch, d, i) - fit.draws.at(ch, d, j));
                const auto [lo, hi] = hdi(diff, 0.89);
                const double t = truth[i] - truth[j];
                covered += (t >= lo && t <= hi) ? 1 : 0;
                ++total;
            }
    }
    EXPECT_GE(static_cast<double>(covered) / static_cast<double>(total), 0.75);
}

TEST(Convergence, IidChains) {
    Rng rng(10);
    PosteriorDraws d;
    d.dim = 1;
    d.draws = 1000;
    d.warmup = 1000;
    d.names = {"x"};
    d.chains.resize(4);
    d.stats.resize(4);
    for (auto& c : d.chains)
        for (int i = 0; i < 1000; ++i) c.push_back(rng.normal());
    const auto r = convergence_report(d);
    ASSERT_TRUE(r.parameters[0].rhat.has_value());
    EXPECT_GE(*r.parameters[0].rhat, 0.999);
    EXPECT_LE(*r.parameters[0].rhat, 1.01);
    EXPECT_NEAR(r.parameters[0].ess, 4000.0, 400.0);
    EXPECT_TRUE(r.pass);
}

TEST(Convergence, SeparatedChainsFail) {
    Rng rng(11);
    PosteriorDraws d;
    d.dim = 1;
    d.draws = 500;
    d.warmup = 1000;
    d.names = {"x"};
    d.chains.resize(2);
    d.stats.resize(2);
    for (int i = 0; i < 500; ++i) {
        d.chains[0].push_back(rng.normal());
        d.chains[1].push_back(5.0 + rng.normal());
    }
    const auto r = convergence_report(d);
    EXPECT_GT(*r.parameters[0].rhat, 1.1);
    EXPECT_FALSE(r.pass);
}

TEST(Convergence, ConstantChainDegenerate) {
    PosteriorDraws d;
    d.dim = 1;
    d.draws = 100;
    d.warmup = 1000;
    d.names = {"x"};
    d.chains = {std::vector<double>(100, 2.0), std::vector<double>(100, 2.0)};
    d.stats.resize(2);
    const auto r = convergence_report(d);
    EXPECT_EQ(r.parameters[0].ess, 0.0);
    EXPECT_FALSE(r.pass);
}

TEST(Convergence, SingleChainRhatUnavailable) {
    Rng rng(12);
    PosteriorDraws d;
    d.dim = 1;
    d.draws = 1000;
    d.warmup = 1000;
    d.names = {"x"};
    d.chains.resize(1);
    d.stats.resize(1);
    for (int i = 0; i < 1000; ++i) d.chains[0].push_back(rng.normal());
    const auto r = convergence_report(d);
    EXPECT_FALSE(r.parameters[0].rhat.has_value());
    EXPECT_FALSE(r.max_rhat.has_value());
}

TEST(Convergence, AutocorrelatedChainHasLowEss) {
    Rng rng(13);
    std::vector<std::vector<double>> chains(4);
    for (auto& c : chains) {
        double x = 0;
        for (int i = 0; i < 1000; ++i) {
            x = 0.9 * x + rng.normal();
            c.push_back(x);
        }
    }
    // AR(1) with phi 0.9: ESS/N = (1 - phi) / (1 + phi).
    EXPECT_NEAR(effective_sample_size(chains), 4000.0 * 0.1 / 1.9, 80.0);
}

TEST(Convergence, FixtureFitPasses) {
    const auto& fit = testing_helpers::base_fit();
    const auto r = convergence_report(fit.draws);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.divergences, 0u);
    EXPECT_LT(*r.max_rhat, 1.01);
    EXPECT_GT(r.min_ess, 400.0);
}

TEST(Convergence, ShortWarmupFailsVerdict) {
    SamplerConfig c = config(42);
    c.warmup = 10;
    const auto fit = fit_bt(testing_helpers::base_wintable(TiesPolicy::spread), {}, c);
    const auto r = convergence_report(fit.draws);
    EXPECT_FALSE(r.pass);
}

TEST(Draws, CsvExport) {
    SamplerConfig c = config(1);
    c.chains = 2;
    c.warmup = 100;
    c.draws = 3;
    const auto d = sample(StdNormal{}, 2, c, {"a", "b"});
    const auto csv = draws_to_csv(d);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "chain,iteration,a,b");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

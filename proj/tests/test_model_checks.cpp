#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace bbt;
using testing_helpers::base_fit;
using testing_helpers::base_wintable;

namespace {

const Fit& davidson_fit() {
    static const Fit fit = [] {
        SamplerConfig sc;
        sc.seed = 42;
        return fit_davidson(base_wintable(TiesPolicy::keep), {}, sc);
    }();
    return fit;
}

} // namespace

TEST(Ppc, ReplicatesWithinSupport) {
    for (const Fit* f : {&base_fit(), &davidson_fit()}) {
        const auto rep = ppc_replicates(*f, 1);
        ASSERT_EQ(rep.wins.size(), rep.pairs.size());
        for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
            EXPECT_EQ(rep.wins[p].size(), f->draws.total_draws());
            for (std::size_t d = 0; d < rep.wins[p].size(); ++d) {
                const long t = rep.ties.empty() ? 0 : rep.ties[p][d];
                EXPECT_GE(rep.wins[p][d], 0);
                EXPECT_GE(t, 0);
                EXPECT_LE(rep.wins[p][d] + t, rep.pairs[p].n());
            }
        }
    }
}

TEST(Ppc, CoverageMonotoneInMass) {
    for (const Fit* f : {&base_fit(), &davidson_fit()}) {
        const auto cov = ppc_coverage(ppc_replicates(*f, 2));
        ASSERT_EQ(cov.rows.size(), 4u);
        for (std::size_t r = 0; r + 1 < cov.rows.size(); ++r) {
            EXPECT_LE(cov.rows[r].wins, cov.rows[r + 1].wins);
            if (cov.rows[r].ties) {
                EXPECT_LE(*cov.rows[r].ties, *cov.rows[r + 1].ties);
            }
        }
        EXPECT_EQ(cov.rows.back().wins, 1.0);
        EXPECT_EQ(f->model == ModelKind::davidson, cov.rows[0].ties.has_value());
    }
}

TEST(Ppc, FixtureCoverageHigh) {
    const auto cov = ppc_coverage(ppc_replicates(base_fit(), 42));
    EXPECT_GE(cov.rows[1].wins, 0.8); // 90% mass
}

TEST(Ppc, ReplicatesCentredOnModel) {
    // Mean replicated wins track N * mean P over draws.
    const auto& f = base_fit();
    const auto rep = ppc_replicates(f, 3);
    for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
        const auto probs = pair_probability_draws(f.draws, rep.pairs[p].i, rep.pairs[p].j);
        double ep = 0, mw = 0;
        for (double x : probs) ep += x;
        for (long w : rep.wins[p]) mw += static_cast<double>(w);
        ep *= static_cast<double>(rep.pairs[p].n()) / static_cast<double>(probs.size());
        mw /= static_cast<double>(rep.wins[p].size());
        EXPECT_NEAR(mw, ep, 0.15);
    }
}

TEST(Waic, SingleDrawHasNoPenalty) {
    const auto w = waic_from_pointwise({{-1.0}, {-2.5}});
    EXPECT_DOUBLE_EQ(w.lppd, -3.5);
    EXPECT_DOUBLE_EQ(w.p_waic, 0.0);
    EXPECT_DOUBLE_EQ(w.waic, 7.0);
}

TEST(Waic, HandComputed) {
    const auto w = waic_from_pointwise({{std::log(0.2), std::log(0.6)}});
    EXPECT_NEAR(w.lppd, std::log(0.4), 1e-14);
    const double a = std::log(0.2), b = std::log(0.6), m = 0.5 * (a + b);
    const double var = (a - m) * (a - m) + (b - m) * (b - m);
    EXPECT_NEAR(w.p_waic, var, 1e-14);
    EXPECT_NEAR(w.waic, -2 * (std::log(0.4) - var), 1e-13);
}

TEST(Waic, PenaltyNonNegativeAndOrderInvariant) {
    const auto w = waic(base_fit());
    EXPECT_GE(w.p_waic, 0.0);
    EXPECT_EQ(w.units, 10u);
    EXPECT_EQ(w.unit, "pair");
    std::vector<std::vector<double>> ll{{-1.0, -2.0, -0.5}, {-3.0, -1.5, -2.2}};
    auto rev = ll;
    std::reverse(rev.begin(), rev.end());
    for (auto& v : rev) std::reverse(v.begin(), v.end());
    EXPECT_NEAR(waic_from_pointwise(ll).waic, waic_from_pointwise(rev).waic, 1e-12);
}

TEST(Waic, SameUnitsAcrossModels) {
    EXPECT_EQ(waic(base_fit()).units, waic(davidson_fit()).units);
    EXPECT_TRUE(std::isfinite(waic(davidson_fit()).waic));
}

TEST(Waic, RequiresDraws) {
    EXPECT_THROW(waic_from_pointwise({{}}), InsufficientDataError);
}

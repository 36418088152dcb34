#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace bbt;
using testing_helpers::base_table;
using testing_helpers::index_of;

namespace {
const std::vector<double> cmc_lgbm{0.547, 0.522, 0.503, 0.527};
const std::vector<double> cmc_xgb{0.531, 0.538, 0.481, 0.546};

// Independent two-pass computation of the effect sizes.
double ref_d(const std::vector<double>& x, const std::vector<double>& y, bool paired) {
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double e : v) s += e;
        return s / static_cast<double>(v.size());
    };
    auto var = [&](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0;
        for (double e : v) s += (e - m) * (e - m);
        return s / static_cast<double>(v.size() - 1);
    };
    if (paired) {
        std::vector<double> d;
        for (std::size_t i = 0; i < x.size(); ++i) d.push_back(x[i] - y[i]);
        return mean(d) / std::sqrt(var(d));
    }
    return (mean(x) - mean(y)) / std::sqrt((var(x) + var(y)) / 2);
}
} // namespace

TEST(CohenD, CmcExample) {
    const double d = cohen_d(cmc_lgbm, cmc_xgb, false);
    EXPECT_NEAR(d, 0.031, 0.0015);
    EXPECT_NEAR(d, ref_d(cmc_lgbm, cmc_xgb, false), 1e-12);
    const double dz = cohen_d(cmc_lgbm, cmc_xgb, true);
    EXPECT_NEAR(dz, 0.035, 0.0015);
    EXPECT_NEAR(dz, ref_d(cmc_lgbm, cmc_xgb, true), 1e-12);
}

TEST(CohenD, IdenticalSamplesAreZero) {
    EXPECT_EQ(cohen_d(cmc_lgbm, cmc_lgbm, false), 0.0);
    EXPECT_EQ(cohen_d(cmc_lgbm, cmc_lgbm, true), 0.0);
}

TEST(CohenD, SignPreserved) {
    EXPECT_NEAR(cohen_d(cmc_xgb, cmc_lgbm, false), -cohen_d(cmc_lgbm, cmc_xgb, false), 1e-15);
}

TEST(CohenD, ZeroDenominator) {
    const std::vector<double> a{1, 1, 1}, b{2, 2, 2};
    EXPECT_TRUE(std::isinf(cohen_d(a, b, false)));
    EXPECT_LT(cohen_d(a, b, false), 0);
    EXPECT_EQ(cohen_d(a, a, false), 0.0);
    // Constant difference: paired sd is zero.
    const std::vector<double> c{1.0, 2.0, 3.0}, d{0.5, 1.5, 2.5};
    EXPECT_TRUE(std::isinf(cohen_d(c, d, true)));
}

TEST(CohenD, InsufficientData) {
    EXPECT_THROW(cohen_d(std::vector<double>{1.0}, std::vector<double>{2.0}, false), InsufficientDataError);
    EXPECT_THROW(cohen_d(std::vector<double>{1.0, 2.0}, std::vector<double>{2.0}, false), InsufficientDataError);
}

TEST(CohenD, ScaleAndShiftInvariant) {
    std::vector<double> x2, y2;
    for (double v : cmc_lgbm) x2.push_back(3.5 * v + 11.0);
    for (double v : cmc_xgb) y2.push_back(3.5 * v + 11.0);
    EXPECT_NEAR(cohen_d(x2, y2, true), cohen_d(cmc_lgbm, cmc_xgb, true), 1e-9);
    EXPECT_NEAR(cohen_d(x2, y2, false), cohen_d(cmc_lgbm, cmc_xgb, false), 1e-9);
}

TEST(CompareCell, MeansWithoutLocalRope) {
    const std::vector<double> a{0.525}, b{0.524};
    EXPECT_EQ(compare_cell(a, b, {}, Direction::higher_is_better), Outcome::win_a);
    EXPECT_EQ(compare_cell(a, b, {}, Direction::lower_is_better), Outcome::win_b);
    EXPECT_EQ(compare_cell(cmc_lgbm, cmc_xgb, {}, Direction::higher_is_better), Outcome::win_a);
}

TEST(CompareCell, PairedLocalRopeTie) {
    LocalRopeConfig c{true, 0.4, true};
    EXPECT_EQ(compare_cell(cmc_lgbm, cmc_xgb, c, Direction::higher_is_better), Outcome::tie);
    c.d_min = 0.0;
    EXPECT_EQ(compare_cell(cmc_lgbm, cmc_xgb, c, Direction::higher_is_better), Outcome::win_a);
}

TEST(CompareCell, ExactEqualityTie) {
    const std::vector<double> a{1.0}, b{1.0};
    EXPECT_EQ(compare_cell(a, b, {}, Direction::higher_is_better), Outcome::tie);
    const auto& t = base_table();
    const auto d = *t.dataset_index("clean1");
    EXPECT_EQ(compare_cell(*t.cell(d, *t.algorithm_index("dt")), *t.cell(d, *t.algorithm_index("lda")), {},
                           Direction::higher_is_better),
              Outcome::tie);
}

TEST(BuildWintable, FixtureLgbmXgb) {
    const auto wt = build_wintable(base_table());
    const auto l = index_of(wt, "lgbm"), x = index_of(wt, "xgb");
    EXPECT_EQ(wt.wins(l, x), 8);
    EXPECT_EQ(wt.wins(x, l), 6);
    EXPECT_EQ(wt.ties(l, x), 6);
}

TEST(BuildWintable, ManualTallyOracle) {
    const auto& t = base_table();
    const auto wt = build_wintable(t);
    for (std::size_t i = 0; i < wt.size(); ++i)
        for (std::size_t j = 0; j < wt.size(); ++j) {
            if (i == j) {
                EXPECT_EQ(wt.wins(i, i), 0);
                continue;
            }
            long w = 0, ties = 0;
            for (std::size_t d = 0; d < t.num_datasets(); ++d) {
                const double a = t.cell(d, i)->front(), b = t.cell(d, j)->front();
                if (a > b) ++w;
                if (a == b) ++ties;
            }
            EXPECT_EQ(wt.wins(i, j), w);
            EXPECT_EQ(wt.ties(i, j), ties);
            EXPECT_EQ(wt.n(i, j), 20);
            EXPECT_EQ(wt.n(i, j), wt.n(j, i));
        }
}

TEST(BuildWintable, Unanimous) {
    std::string csv = "dataset,algorithm,measure\n";
    for (int d = 0; d < 20; ++d)
        csv += "d" + std::to_string(d) + ",A,0.9\nd" + std::to_string(d) + ",B,0.1\n";
    const auto wt = build_wintable(parse_results(csv));
    EXPECT_EQ(wt.wins(0, 1), 20);
    EXPECT_EQ(wt.wins(1, 0), 0);
    EXPECT_EQ(wt.ties(0, 1), 0);
}

TEST(BuildWintable, MissingRows) {
    const auto t = remove_cell(remove_cell(base_table(), "biomed", "xgb"), "breast", "xgb");
    const auto wt = build_wintable(t);
    const auto x = index_of(wt, "xgb");
    for (std::size_t i = 0; i < wt.size(); ++i)
        for (std::size_t j = i + 1; j < wt.size(); ++j)
            EXPECT_EQ(wt.n(i, j), (i == x || j == x) ? 18 : 20);
}

TEST(BuildWintable, LocalRopeNeedsFolds) {
    LocalRopeConfig c;
    c.enabled = true;
    EXPECT_THROW(build_wintable(base_table(), c), ConfigError);
}

TEST(BuildWintable, DirectionSwapsWins) {
    const auto& t = base_table();
    const auto hi = build_wintable(t, {}, Direction::higher_is_better);
    const auto lo = build_wintable(t, {}, Direction::lower_is_better);
    for (std::size_t i = 0; i < hi.size(); ++i)
        for (std::size_t j = 0; j < hi.size(); ++j) {
            EXPECT_EQ(hi.wins(i, j), lo.wins(j, i));
            EXPECT_EQ(hi.ties(i, j), lo.ties(i, j));
        }
}

TEST(BuildWintable, AffineTransformInvariant) {
    const auto& t = base_table();
    ResultsTable scaled = t;
    for (std::size_t d = 0; d < t.num_datasets(); ++d)
        for (std::size_t a = 0; a < t.num_algorithms(); ++a) scaled.set_cell(d, a, {t.cell(d, a)->front() * 4.0});
    EXPECT_EQ(build_wintable(scaled), build_wintable(t));
}

TEST(BuildWintable, PermutationEquivariant) {
    const auto& t = base_table();
    const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    std::vector<std::size_t> all(t.num_datasets());
    for (std::size_t d = 0; d < all.size(); ++d) all[d] = d;
    const auto p = select(t, perm, all);
    const auto a = build_wintable(t), b = build_wintable(p);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            EXPECT_EQ(b.wins(i, j), a.wins(perm[i], perm[j]));
            EXPECT_EQ(b.ties(i, j), a.ties(perm[i], perm[j]));
        }
}

TEST(TiesPolicy, SpreadAddForgetKeep) {
    WinTable wt({"a", "b"});
    wt.set(0, 1, 8, 6, 6);
    const auto s = apply_ties_policy(wt, TiesPolicy::spread);
    EXPECT_EQ(s.wins(0, 1), 11);
    EXPECT_EQ(s.wins(1, 0), 9);
    EXPECT_EQ(s.n(0, 1), 20);
    EXPECT_EQ(s.ties(0, 1), 0);
    const auto a = apply_ties_policy(wt, TiesPolicy::add);
    EXPECT_EQ(a.wins(0, 1), 14);
    EXPECT_EQ(a.wins(1, 0), 12);
    EXPECT_EQ(a.n(0, 1), 26);
    const auto f = apply_ties_policy(wt, TiesPolicy::forget);
    EXPECT_EQ(f.wins(0, 1), 8);
    EXPECT_EQ(f.n(0, 1), 14);
    EXPECT_EQ(apply_ties_policy(wt, TiesPolicy::keep), wt);
}

TEST(TiesPolicy, NoTiesUnchanged) {
    WinTable wt({"a", "b"});
    wt.set(0, 1, 8, 6, 0);
    for (auto p : {TiesPolicy::add, TiesPolicy::spread, TiesPolicy::forget, TiesPolicy::keep})
        EXPECT_EQ(apply_ties_policy(wt, p), wt);
}

TEST(TiesPolicy, CountsConsistentOnFixture) {
    for (auto p : {TiesPolicy::add, TiesPolicy::spread, TiesPolicy::forget}) {
        const auto wt = apply_ties_policy(build_wintable(base_table()), p);
        EXPECT_FALSE(wt.has_ties());
        for (std::size_t i = 0; i < wt.size(); ++i)
            for (std::size_t j = i + 1; j < wt.size(); ++j) EXPECT_EQ(wt.wins(i, j) + wt.wins(j, i), wt.n(i, j));
    }
}

TEST(WintableCsv, Header) {
    WinTable wt({"a", "b"});
    wt.set(0, 1, 3, 2, 1);
    EXPECT_EQ(to_csv(wt), "alg_i,alg_j,n,wins_i,wins_j,ties\na,b,6,3,2,1\n");
}

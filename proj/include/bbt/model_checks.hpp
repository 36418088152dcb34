#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <cmath>
#include <limits>
#include <vector>

#include "bbt/fit.hpp"
#include "bbt/model.hpp"
#include "bbt/random.hpp"
#include "bbt/summary.hpp"

namespace bbt {

// Replicated counts per observed pair, one entry per pooled draw.
struct Replicates {
    ModelKind model = ModelKind::bradley_terry;
    std::vector<PairCounts> pairs;
    std::vector<std::vector<long>> wins; // wins of pair.i over pair.j
    std::vector<std::vector<long>> ties; // Davidson only
};

struct CoverageRow {
    double mass = 0.0;
    double wins = 0.0;
    std::optional<double> ties;
};

struct PpcCoverage {
    std::vector<CoverageRow> rows;
    std::size_t pairs = 0;
};

struct WaicResult {
    double waic = 0.0;
    double lppd = 0.0;
    double p_waic = 0.0;
    std::size_t units = 0;
    std::string unit = "pair";
};

inline Replicates ppc_replicates(const Fit& fit, std::uint64_t seed) {
    Replicates rep;
    rep.model = fit.model;
    rep.pairs = observed_pairs(fit.wintable);
    rep.wins.resize(rep.pairs.size());
    if (fit.model == ModelKind::davidson) rep.ties.resize(rep.pairs.size());
    Rng rng(derive_seed(seed, 0x99c));
    const auto& draws = fit.draws;
    for (std::size_t c = 0; c < draws.num_chains(); ++c)
        for (std::size_t d = 0; d < draws.draws; ++d)
            for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
                const auto& pc = rep.pairs[p];
                const double bi = draws.at(c, d, pc.i), bj = draws.at(c, d, pc.j);
                if (fit.model == ModelKind::bradley_terry) {
                    rep.wins[p].push_back(rng.binomial(pc.n(), pair_prob(bi, bj)));
                } else {
                    const auto pr = davidson_probs(bi, bj, draws.at(c, d, fit.nu_index()));
                    const long w = rng.binomial(pc.n(), pr.i_wins);
                    const double rest = pr.tie + pr.j_wins;
                    const long t = rest > 0 ? rng.binomial(pc.n() - w, pr.tie / rest) : 0;
                    rep.wins[p].push_back(w);
                    rep.ties[p].push_back(t);
                }
            }
    return rep;
}

inline PpcCoverage ppc_coverage(const Replicates& rep,
                                const std::vector<double>& masses = {0.50, 0.90, 0.95, 1.00}) {
    PpcCoverage cov;
    cov.pairs = rep.pairs.size();
    const double n = static_cast<double>(rep.pairs.size());
    auto inside = [](const std::vector<long>& r, long observed, double mass) {
        std::vector<double> v(r.begin(), r.end());
        const auto [lo, hi] = hdi(v, mass);
        return static_cast<double>(observed) >= lo && static_cast<double>(observed) <= hi;
    };
    for (double m : masses) {
        CoverageRow row;
        row.mass = m;
        std::size_t hits = 0, tie_hits = 0;
        for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
            if (inside(rep.wins[p], rep.pairs[p].wins_ij, m)) ++hits;
            if (!rep.ties.empty() && inside(rep.ties[p], rep.pairs[p].ties, m)) ++tie_hits;
        }
        row.wins = n > 0 ? static_cast<double>(hits) / n : 0.0;
        if (!rep.ties.empty()) row.ties = n > 0 ? static_cast<double>(tie_hits) / n : 0.0;
        cov.rows.push_back(row);
    }
    return cov;
}

// ll[unit][draw] pointwise log-likelihoods.
inline WaicResult waic_from_pointwise(const std::vector<std::vector<double>>& ll) {
    WaicResult r;
    r.units = ll.size();
    for (const auto& v : ll) {
        if (v.empty()) throw InsufficientDataError("WAIC needs at least one draw");
        const double m = *std::max_element(v.begin(), v.end());
        double s = 0.0, mean = 0.0;
        for (double x : v) {
            s += std::exp(x - m);
            mean += x;
        }
        const double n = static_cast<double>(v.size());
        r.lppd += m + std::log(s / n);
        mean /= n;
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        r.p_waic += v.size() > 1 ? var / (n - 1.0) : 0.0;
    }
    r.waic = -2.0 * (r.lppd - r.p_waic);
    return r;
}

// WAIC with one pointwise unit per observed pair. Pointwise likelihoods keep
// their binomial (or trinomial) coefficients.
inline WaicResult waic(const Fit& fit) {
    const auto& draws = fit.draws;
    if (draws.total_draws() == 0) throw InsufficientDataError("WAIC needs at least one draw");
    std::vector<PairCounts> pairs = observed_pairs(fit.wintable);
    std::vector<std::vector<double>> ll(pairs.size());
    if (fit.model == ModelKind::bradley_terry) {
        BradleyTerryModel model(fit.wintable, fit.prior);
        for (std::size_t c = 0; c < draws.num_chains(); ++c)
            for (std::size_t d = 0; d < draws.draws; ++d)
                for (std::size_t p = 0; p < pairs.size(); ++p)
                    ll[p].push_back(model.pair_log_lik(pairs[p], draws.row(c, d)));
    } else {
        DavidsonModel model(fit.wintable, fit.prior);
        for (std::size_t c = 0; c < draws.num_chains(); ++c)
            for (std::size_t d = 0; d < draws.draws; ++d)
                for (std::size_t p = 0; p < pairs.size(); ++p)
                    ll[p].push_back(model.pair_log_lik(pairs[p], draws.row(c, d)));
    }
    return waic_from_pointwise(ll);
}

} // namespace bbt

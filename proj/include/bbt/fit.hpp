#pragma once

#include <string>
#include <vector>

#include "bbt/model.hpp"
#include "bbt/sampler.hpp"
#include "bbt/wintable.hpp"

namespace bbt {

inline const char* to_string(ModelKind m) {
    return m == ModelKind::bradley_terry ? "bt" : "davidson";
}

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "bt" || s == "bradley-terry") return ModelKind::bradley_terry;
    if (s == "davidson") return ModelKind::davidson;
    throw ConfigError("unknown model '" + std::string(s) + "' (bt, davidson)");
}

// A fitted model: the wintable it saw plus posterior draws whose first K
// coordinates are the merits.
struct Fit {
    ModelKind model = ModelKind::bradley_terry;
    WinTable wintable;
    PriorConfig prior;
    SamplerConfig sampler;
    PosteriorDraws draws;

    std::size_t num_algorithms() const { return wintable.size(); }
    const std::vector<std::string>& algorithms() const { return wintable.algorithms(); }
    std::size_t nu_index() const { return num_algorithms(); }
    std::size_t log_sigma_index() const {
        return model == ModelKind::davidson ? num_algorithms() + 1 : num_algorithms();
    }
};

inline std::vector<std::string> parameter_names(const WinTable& wt, ModelKind model) {
    std::vector<std::string> names;
    for (const auto& a : wt.algorithms()) names.push_back("beta[" + a + "]");
    if (model == ModelKind::davidson) names.push_back("nu");
    names.push_back("log_sigma");
    return names;
}

namespace detail {

// Merits near zero, nu and log sigma at zero.
inline InitFn default_init(std::size_t k, std::size_t dim) {
    return [k, dim](Rng& rng) {
        std::vector<double> x(dim, 0.0);
        for (std::size_t i = 0; i < k; ++i) x[i] = rng.uniform(-0.1, 0.1);
        return x;
    };
}

} // namespace detail

inline Fit fit_bt(const WinTable& wt, const PriorConfig& prior, const SamplerConfig& sampler) {
    BradleyTerryModel model(wt, prior);
    Fit fit{ModelKind::bradley_terry, wt, prior, sampler, {}};
    fit.draws = sample(model, model.dim(), sampler, parameter_names(wt, fit.model),
                       detail::default_init(wt.size(), model.dim()));
    return fit;
}

inline Fit fit_davidson(const WinTable& wt, const PriorConfig& prior, const SamplerConfig& sampler) {
    DavidsonModel model(wt, prior);
    Fit fit{ModelKind::davidson, wt, prior, sampler, {}};
    fit.draws = sample(model, model.dim(), sampler, parameter_names(wt, fit.model),
                       detail::default_init(wt.size(), model.dim()));
    return fit;
}

inline Fit fit_model(const WinTable& wt, ModelKind model, const PriorConfig& prior, const SamplerConfig& sampler) {
    return model == ModelKind::davidson ? fit_davidson(wt, prior, sampler) : fit_bt(wt, prior, sampler);
}

// One row per draw: chain, iteration, then every parameter.
inline std::string draws_to_csv(const PosteriorDraws& draws) {
    std::string out = "chain,iteration";
    for (const auto& n : draws.names) out += "," + n;
    out += '\n';
    for (std::size_t c = 0; c < draws.num_chains(); ++c)
        for (std::size_t d = 0; d < draws.draws; ++d) {
            out += std::to_string(c) + ',' + std::to_string(d);
            for (double v : draws.row(c, d)) out += ',' + detail::format_double(v);
            out += '\n';
        }
    return out;
}

} // namespace bbt

#pragma once

#include <string>

#include "bbt/bbt.hpp"

namespace testing_helpers {

inline std::string fixture_path(const std::string& name) { return std::string(BBT_FIXTURE_DIR) + "/" + name; }

inline const bbt::ResultsTable& base_table() {
    static const bbt::ResultsTable t = bbt::parse_results(bbt::read_file(fixture_path("base.csv")));
    return t;
}

inline bbt::WinTable base_wintable(bbt::TiesPolicy policy) {
    return bbt::apply_ties_policy(bbt::build_wintable(base_table()), policy);
}

// Default-configuration fit of the fixture with spread ties, shared across tests.
inline const bbt::Fit& base_fit() {
    static const bbt::Fit fit = [] {
        bbt::SamplerConfig sc;
        sc.seed = 42;
        return bbt::fit_bt(base_wintable(bbt::TiesPolicy::spread), {}, sc);
    }();
    return fit;
}

inline std::size_t index_of(const bbt::WinTable& wt, const std::string& name) {
    const auto& a = wt.algorithms();
    return static_cast<std::size_t>(std::find(a.begin(), a.end(), name) - a.begin());
}

} // namespace testing_helpers

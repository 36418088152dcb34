#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace bbt;

namespace {

RunConfig fixture_config() {
    RunConfig c;
    c.input = testing_helpers::fixture_path("base.csv");
    c.sampler.warmup = 300;
    c.sampler.draws = 300;
    return c;
}

// Counts of opening and closing tags match and every tag closes.
bool balanced_svg(const std::string& s) {
    if (s.rfind("<svg", 0) != 0 || s.find("</svg>") == std::string::npos) return false;
    int depth = 0;
    for (std::size_t p = s.find('<'); p != std::string::npos; p = s.find('<', p + 1)) {
        const auto end = s.find('>', p);
        if (end == std::string::npos) return false;
        const std::string tag = s.substr(p, end - p + 1);
        if (tag[1] == '/') --depth;
        else if (tag[tag.size() - 2] != '/') ++depth;
        if (depth < 0) return false;
    }
    return depth == 0;
}

} // namespace

TEST(Report, MarkdownShowsJsonNumbers) {
    const auto out = run_compare(fixture_config());
    const auto md = render(out.report, Format::markdown);
    for (const auto& r : out.report["summary"]["rows"]) {
        EXPECT_NE(md.find(r["first"].get<std::string>() + " > " + r["second"].get<std::string>()), std::string::npos);
        EXPECT_NE(md.find(detail::fixed(r["mean"])), std::string::npos);
        EXPECT_NE(md.find(detail::fixed(r["above_50"])), std::string::npos);
    }
    EXPECT_NE(md.find("seed"), std::string::npos);
}

TEST(Report, JsonParsesAndCsvHasRows) {
    const auto out = run_compare(fixture_config());
    const auto parsed = Json::parse(render(out.report, Format::json));
    EXPECT_EQ(parsed, out.report);
    EXPECT_EQ(parsed["config"]["seed"], 42);
    const auto csv = render(out.report, Format::csv);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
    EXPECT_EQ(csv.substr(0, csv.find(',')), "first");
}

TEST(Report, Deterministic) {
    auto c = fixture_config();
    const auto a = render(run_compare(c).report, Format::json);
    c.sampler.parallel = false;
    EXPECT_EQ(a, render(run_compare(c).report, Format::json));
}

TEST(Report, EveryCommandRenders) {
    auto c = fixture_config();
    for (auto fmt : {Format::markdown, Format::csv, Format::json}) {
        EXPECT_FALSE(render(run_diagnose(c).report, fmt).empty());
        EXPECT_FALSE(render(run_mle(c).report, fmt).empty());
        EXPECT_FALSE(render(run_freq(c).report, fmt).empty());
    }
    const auto d = run_diagnose(c).report;
    EXPECT_EQ(d["waic"]["unit"], "pair");
    EXPECT_EQ(d["ppc"]["rows"].size(), 4u);
}

TEST(Report, Svg) {
    auto c = fixture_config();
    const auto forest = run_plot(c);
    ASSERT_TRUE(forest.raw.has_value());
    EXPECT_TRUE(balanced_svg(*forest.raw));
    std::size_t circles = 0;
    for (auto p = forest.raw->find("<circle"); p != std::string::npos; p = forest.raw->find("<circle", p + 1)) ++circles;
    EXPECT_EQ(circles, 10u);
    c.plot = PlotKind::cd;
    const auto cd = run_plot(c);
    EXPECT_TRUE(balanced_svg(*cd.raw));
    EXPECT_NE(cd.raw->find("CD = 1.36"), std::string::npos);
    EXPECT_EQ(detail::escape_xml("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;");
}

TEST(Report, ConfigValidation) {
    auto c = fixture_config();
    c.model = ModelKind::davidson;
    c.ties = TiesPolicy::spread;
    EXPECT_THROW(run_compare(c), ConfigError);
    c = fixture_config();
    c.ties = TiesPolicy::keep;
    EXPECT_THROW(run_compare(c), ConfigError);
    c = fixture_config();
    c.local_rope = true; // fixture has no folds
    EXPECT_THROW(run_compare(c), ConfigError);
    c = fixture_config();
    c.input = "/nonexistent/file.csv";
    EXPECT_THROW(run_compare(c), IoError);
}

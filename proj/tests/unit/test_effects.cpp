#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cure/effects.hpp"
#include "cure/io/config_spec.hpp"

using namespace cure;
using causal::Admg;

namespace {

struct LinearFixture {
    Dataset ds;
    Admg g;
};

/// y = 2x + noise with x ~ U[0, 1] (default 0), plus an unrelated option u.
LinearFixture linear_fixture(std::uint64_t seed, std::size_t n = 5000, const std::string& unrelated = "u") {
    auto space = std::make_shared<const ConfigSpace>(
        std::vector<OptionDef>{OptionDef::continuous("x", 0.0, 1.0, 0.0), OptionDef::continuous(unrelated, 0.0, 1.0, 0.5)});
    Rng rng(seed);
    std::vector<double> x(n), u(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform();
        u[i] = rng.uniform();
        y[i] = 2.0 * x[i] + 0.3 * rng.normal();
    }
    Dataset ds({{"x", Role::option, x}, {unrelated, Role::option, u}, {"y", Role::objective, y}}, space);
    Admg g({"x", unrelated, "y"});
    g.add_directed("x", "y");
    return {std::move(ds), std::move(g)};
}

} // namespace

TEST(CausalPaths, SingleChain) {
    Admg g({"X", "M", "Y"});
    g.add_directed("X", "M");
    g.add_directed("M", "Y");
    EXPECT_EQ(find_causal_paths(g, "X", "Y"), (std::vector<CausalPath>{{"X", "M", "Y"}}));
}

TEST(CausalPaths, EnumeratesEveryPath) {
    Admg g({"X", "M", "Y"});
    g.add_directed("X", "Y");
    g.add_directed("X", "M");
    g.add_directed("M", "Y");
    auto paths = find_causal_paths(g, "X", "Y");
    std::sort(paths.begin(), paths.end());
    EXPECT_EQ(paths, (std::vector<CausalPath>{{"X", "M", "Y"}, {"X", "Y"}}));
    EXPECT_EQ(find_causal_paths(g, "X", "Y", 1), (std::vector<CausalPath>{{"X", "Y"}}));
}

TEST(CausalPaths, UnreachableAndBidirectedGiveNothing) {
    Admg g({"X", "M", "Y"});
    g.add_directed("M", "Y");
    g.add_bidirected("X", "M");
    EXPECT_TRUE(find_causal_paths(g, "X", "Y").empty());
    EXPECT_FALSE(has_causal_path(g, "X", "Y"));
}

TEST(InterventionalMean, LinearEffect) {
    const auto f = linear_fixture(1);
    const double m = interventional_mean(f.ds, f.g, "x", 0.75, "y");
    EXPECT_GE(m, 1.40);
    EXPECT_LE(m, 1.60);
}

TEST(InterventionalMean, IndependentOptionIsFlat) {
    // A difference of two 500-row bin means has standard error sd * sqrt(2 / 500).
    std::vector<double> ratio;
    for (std::uint64_t seed = 0; seed < 21; ++seed) {
        const auto f = linear_fixture(100 + seed);
        const double sd = sample_sd(f.ds.values("y"));
        const double a = interventional_mean(f.ds, f.g, "u", 0.1, "y");
        const double b = interventional_mean(f.ds, f.g, "u", 0.9, "y");
        EXPECT_LT(std::abs(a - b), 4.0 * sd * std::sqrt(2.0 / 500.0)) << seed;
        ratio.push_back(std::abs(a - b) / sd);
    }
    std::nth_element(ratio.begin(), ratio.begin() + 10, ratio.end());
    EXPECT_LT(ratio[10], 0.05);
}

TEST(InterventionalMean, ValueOutsideDomainRejected) {
    const auto f = linear_fixture(3, 500);
    EXPECT_THROW(interventional_mean(f.ds, f.g, "x", 1.5, "y"), UsageError);
}

TEST(Ace, NoPathMeansZero) {
    const auto f = linear_fixture(4, 500);
    EXPECT_EQ(ace(f.ds, f.g, "u", "y"), 0.0);
}

TEST(Ace, LinearEffectOverQuarterGrid) {
    const auto f = linear_fixture(5);
    EffectOptions opt;
    opt.grid_size = 4;
    EXPECT_EQ(intervention_grid(f.ds.space()->at("x"), 4), (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
    EXPECT_NEAR(ace(f.ds, f.g, "x", "y", opt), 2.0 * (0.25 + 0.5 + 0.75 + 1.0) / 4.0, 0.1);
}

TEST(Ace, InvariantToRelabellingUnrelatedColumns) {
    const auto a = linear_fixture(6, 3000, "u");
    const auto b = linear_fixture(6, 3000, "renamed_decoy");
    EXPECT_EQ(ace(a.ds, a.g, "x", "y"), ace(b.ds, b.g, "x", "y"));
}

TEST(Ace, CategoricalUsesEveryLevel) {
    auto space = std::make_shared<const ConfigSpace>(std::vector<OptionDef>{OptionDef::categorical("c", {"a", "b", "c"}, 0)});
    Rng rng(7);
    std::vector<double> c(3000), y(3000);
    const double offset[3] = {0.0, 1.0, 3.0};
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = static_cast<double>(rng.index(3));
        y[i] = offset[static_cast<int>(c[i])] + 0.1 * rng.normal();
    }
    const Dataset ds({{"c", Role::option, c}, {"y", Role::objective, y}}, space);
    Admg g({"c", "y"});
    g.add_directed("c", "y");
    EXPECT_NEAR(ace(ds, g, "c", "y"), (0.0 + 1.0 + 3.0) / 3.0, 0.02);
}

TEST(RankAndReduce, SingleTargetTopOneIsArgmax) {
    const ConfigSpace space({OptionDef::continuous("a", 0, 1, 0), OptionDef::continuous("b", 0, 1, 0), OptionDef::continuous("c", 0, 1, 0)});
    AceTable t;
    t.targets = {"y"};
    t.options = {"a", "b", "c"};
    t.values["y"] = {{"a", 0.2}, {"b", 0.9}, {"c", 0.5}};
    const auto r = rank_and_reduce(t, 1, space);
    EXPECT_EQ(r.selected, std::vector<std::string>{"b"});
    EXPECT_EQ(r.space.pinned().size(), 2u);
    EXPECT_FALSE(r.degenerate());
}

TEST(RankAndReduce, AllZeroTakesFirstKLexicallyAndFlags) {
    const ConfigSpace space({OptionDef::continuous("c", 0, 1, 0), OptionDef::continuous("a", 0, 1, 0), OptionDef::continuous("b", 0, 1, 0)});
    AceTable t;
    t.targets = {"y"};
    t.options = {"c", "a", "b"};
    t.values["y"] = {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}};
    const auto r = rank_and_reduce(t, 2, space);
    EXPECT_EQ(r.top.at("y"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(r.degenerate_targets, std::vector<std::string>{"y"});
}

TEST(RankAndReduce, LargeKSelectsEverything) {
    const ConfigSpace space({OptionDef::continuous("a", 0, 1, 0), OptionDef::continuous("b", 0, 1, 0)});
    AceTable t;
    t.targets = {"y"};
    t.options = {"a", "b"};
    t.values["y"] = {{"a", 0.0}, {"b", 0.3}};
    EXPECT_EQ(rank_and_reduce(t, 7, space).selected, (std::vector<std::string>{"a", "b"}));
    EXPECT_THROW(rank_and_reduce(t, 0, space), UsageError);
}

TEST(RankAndReduce, TiesBrokenByNameAndUnionAcrossTargets) {
    const ConfigSpace space({OptionDef::continuous("d", 0, 1, 0), OptionDef::continuous("c", 0, 1, 0), OptionDef::continuous("b", 0, 1, 0),
                             OptionDef::continuous("a", 0, 1, 0)});
    AceTable t;
    t.targets = {"y1", "y2"};
    t.options = {"a", "b", "c", "d"};
    t.values["y1"] = {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 0.0}};
    t.values["y2"] = {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}, {"d", 2.0}};
    const auto r = rank_and_reduce(t, 2, space);
    EXPECT_EQ(r.top.at("y1"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(r.top.at("y2"), (std::vector<std::string>{"d"}));
    EXPECT_EQ(r.selected, (std::vector<std::string>{"d", "b", "a"}));
    for (int i = 0; i < 5; ++i) EXPECT_EQ(rank_and_reduce(t, 2, space).selected, r.selected);
}

TEST(RankAndReduce, HuskyFixtureReducesThirtyFourToTen) {
    const auto spec = load_config_spec(std::string(CURE_DATA_DIR) + "/husky_config_space.json");
    std::ifstream in(std::string(CURE_DATA_DIR) + "/husky_ace_table.csv");
    ASSERT_TRUE(in);
    const auto table = read_ace_csv(in);
    EXPECT_EQ(table.targets.size(), 4u);
    EXPECT_EQ(spec.space->free_names().size(), 34u);
    const auto r = rank_and_reduce(table, 5, *spec.space);
    EXPECT_EQ(r.selected.size(), 10u);
    EXPECT_DOUBLE_EQ(table.at("energy", "scaling_speed"), 199.349);
    EXPECT_EQ(table.at("energy", "theta_stopped_vel"), 0.0);
}

TEST(RankAndReduce, TomlAndJsonFixturesAgree) {
    const auto a = load_config_spec(std::string(CURE_DATA_DIR) + "/husky_config_space.json");
    const auto b = load_config_spec(std::string(CURE_DATA_DIR) + "/husky_config_space.toml");
    ASSERT_EQ(a.space->size(), b.space->size());
    for (std::size_t i = 0; i < a.space->size(); ++i) {
        const auto& x = a.space->options()[i];
        const auto& y = b.space->options()[i];
        EXPECT_EQ(x.name, y.name);
        EXPECT_EQ(x.kind, y.kind);
        EXPECT_EQ(x.lo, y.lo);
        EXPECT_EQ(x.hi, y.hi);
        EXPECT_EQ(x.default_value, y.default_value);
        EXPECT_EQ(x.fixed, y.fixed);
    }
}

TEST(AceCsv, WriteReadRoundTrip) {
    AceTable t;
    t.targets = {"y1", "y2"};
    t.options = {"a", "b"};
    t.values["y1"] = {{"a", 0.125}, {"b", 3.5}};
    t.values["y2"] = {{"a", 1.0 / 3.0}, {"b", 0.0}};
    std::stringstream buf;
    write_ace_csv(t, {"b"}, buf);
    const auto back = read_ace_csv(buf);
    EXPECT_EQ(back.values, t.values);
    std::istringstream bad("name,target,ace\n");
    EXPECT_THROW(read_ace_csv(bad), DataError);
}

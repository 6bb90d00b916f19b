#include <gtest/gtest.h>

#include <numeric>

#include "cure/space.hpp"

using namespace cure;

namespace {

ConfigSpace mixed_space() {
    return ConfigSpace({OptionDef::continuous("speed", 0.0, 2.0, 1.0), OptionDef::integer("samples", 10, 30, 20),
                        OptionDef::boolean("recovery", true), OptionDef::categorical("planner", {"dwa", "teb", "mpc"}, 0),
                        OptionDef::continuous("goal_tol", 0.1, 0.1, 0.1, true)});
}

} // namespace

TEST(Space, BooleanSamplesStayInDomainAndRepeat) {
    ConfigSpace s({OptionDef::boolean("flag", false)});
    const auto a = sample_uniform(s, 4, 7);
    const auto b = sample_uniform(s, 4, 7);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a, b);
    for (const auto& c : a) {
        const auto& v = std::get<Level>(c.at("flag"));
        EXPECT_LT(v.index, 2u);
    }
}

TEST(Space, ContinuousSampleMeanNearCentre) {
    ConfigSpace s({OptionDef::continuous("x", 0.0, 1.0, 0.5)});
    const auto cs = sample_uniform(s, 1000, 11);
    double sum = 0.0;
    for (const auto& c : cs) sum += std::get<double>(c.at("x"));
    const double mean = sum / 1000.0;
    EXPECT_GE(mean, 0.45);
    EXPECT_LE(mean, 0.55);
}

TEST(Space, ZeroSamplesRejected) {
    EXPECT_THROW(sample_uniform(mixed_space(), 0, 1), UsageError);
    EXPECT_THROW(sample_uniform(ConfigSpace{}, 3, 1), UsageError);
}

TEST(Space, EverySampledValueInDomain) {
    const auto s = mixed_space();
    for (const auto& c : sample_uniform(s, 500, 3)) {
        EXPECT_NO_THROW(s.check(c));
        EXPECT_EQ(std::get<double>(c.at("goal_tol")), 0.1);
    }
}

TEST(Space, IntegerDomainInclusiveAtBothEnds) {
    ConfigSpace s({OptionDef::integer("n", 1, 3, 2)});
    std::set<std::int64_t> seen;
    for (const auto& c : sample_uniform(s, 300, 5)) seen.insert(std::get<std::int64_t>(c.at("n")));
    EXPECT_EQ(seen, (std::set<std::int64_t>{1, 2, 3}));
}

TEST(Space, EqualSeedsGiveIdenticalSequences) {
    const auto s = mixed_space();
    EXPECT_EQ(sample_uniform(s, 50, 42), sample_uniform(s, 50, 42));
    EXPECT_NE(sample_uniform(s, 50, 42), sample_uniform(s, 50, 43));
}

TEST(Space, EmbedFillsPinnedDefaults) {
    ConfigSpace s({OptionDef::integer("A", 0, 5, 0), OptionDef::integer("B", 0, 5, 0)});
    ReducedSpace r(s, {"A"});
    Configuration partial;
    partial.set("A", std::int64_t{1});
    const auto full = embed(r, partial);
    EXPECT_EQ(std::get<std::int64_t>(full.at("A")), 1);
    EXPECT_EQ(std::get<std::int64_t>(full.at("B")), 0);
    EXPECT_EQ(full.size(), 2u);
}

TEST(Space, EmbedRejectsPinnedOrMissingAssignment) {
    ConfigSpace s({OptionDef::integer("A", 0, 5, 0), OptionDef::integer("B", 0, 5, 0)});
    ReducedSpace r(s, {"A"});
    Configuration wrong;
    wrong.set("B", std::int64_t{2});
    EXPECT_THROW(embed(r, wrong), UsageError);
    Configuration extra;
    extra.set("A", std::int64_t{1});
    extra.set("B", std::int64_t{2});
    EXPECT_THROW(embed(r, extra), UsageError);
    EXPECT_THROW(embed(r, Configuration{}), UsageError);
}

TEST(Space, EmbedIsIdentityWhenEverythingSelected) {
    const auto s = mixed_space();
    const auto r = ReducedSpace::full(s);
    for (const auto& c : sample_uniform(s, 20, 9)) EXPECT_EQ(r.embed(r.restrict(c)), c);
}

TEST(Space, EmbedAfterRestrictKeepsSelectedValues) {
    const auto s = mixed_space();
    ReducedSpace r(s, {"speed", "planner"});
    Rng rng(4);
    for (const auto& full : r.sample(30, rng)) {
        const auto partial = r.restrict(full);
        EXPECT_EQ(partial.size(), 2u);
        EXPECT_EQ(r.embed(partial), full);
        EXPECT_EQ(r.restrict(r.embed(partial)), partial);
    }
}

TEST(Space, NoImplicitCoercionBetweenValueKinds) {
    const auto s = mixed_space();
    EXPECT_FALSE(in_domain(s.at("samples"), Value{20.0}));
    EXPECT_FALSE(in_domain(s.at("speed"), Value{std::int64_t{1}}));
    EXPECT_TRUE(in_domain(s.at("planner"), Value{Level{2}}));
    EXPECT_FALSE(in_domain(s.at("planner"), Value{Level{3}}));
}

TEST(Space, InvalidDefinitionsRejected) {
    EXPECT_THROW(ConfigSpace({OptionDef::continuous("x", 1.0, 0.0, 0.5)}), DataError);
    EXPECT_THROW(ConfigSpace({OptionDef::continuous("x", 0.0, 1.0, 2.0)}), DataError);
    EXPECT_THROW(ConfigSpace({OptionDef::categorical("c", {"a", "a"}, 0)}), DataError);
    EXPECT_THROW(ConfigSpace({OptionDef::boolean("x", true), OptionDef::boolean("x", false)}), DataError);
}

TEST(Space, FixedOptionsAreNotFree) {
    const auto s = mixed_space();
    const auto free = s.free_names();
    EXPECT_EQ(free.size(), 4u);
    EXPECT_EQ(std::find(free.begin(), free.end(), "goal_tol"), free.end());
    EXPECT_THROW(ReducedSpace(s, {"goal_tol"}), UsageError);
}

TEST(Space, ValueTextRoundTrip) {
    const auto s = mixed_space();
    for (const auto& c : sample_uniform(s, 50, 21))
        for (const auto& o : s.options()) EXPECT_EQ(parse_value(o, format_value(o, c.at(o.name))), c.at(o.name));
}

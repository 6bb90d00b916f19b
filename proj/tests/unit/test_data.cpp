#include <gtest/gtest.h>

#include <sstream>

#include "cure/data.hpp"

using namespace cure;

namespace {

std::shared_ptr<const ConfigSpace> speed_space() {
    return std::make_shared<const ConfigSpace>(std::vector<OptionDef>{OptionDef::continuous("scaling_speed", 0.0, 2.0, 1.0)});
}

RoleMap appendix_roles() {
    return {{"Energy", Role::objective}, {"Positional_error", Role::objective}, {"Task_success_rate", Role::success_flag}};
}

} // namespace

TEST(Data, LoadsRoleTaggedTable) {
    std::istringstream in("scaling_speed,Energy,Positional_error,Task_success_rate\n"
                          "0.5,30.1,0.2,1\n"
                          "1.0,35.4,0.4,0\n"
                          "1.5,41.0,0.1,1\n");
    const auto ds = read_dataset(in, speed_space(), appendix_roles());
    EXPECT_EQ(ds.rows(), 3u);
    EXPECT_EQ(ds.role("scaling_speed"), Role::option);
    EXPECT_EQ(ds.role("Energy"), Role::objective);
    EXPECT_EQ(ds.role("Positional_error"), Role::objective);
    EXPECT_EQ(ds.role("Task_success_rate"), Role::success_flag);
    EXPECT_DOUBLE_EQ(ds.values("Energy")[1], 35.4);
}

TEST(Data, ColumnOrderIsInsignificant) {
    std::istringstream a("scaling_speed,Energy,Positional_error,Task_success_rate\n0.5,30,0.2,1\n");
    std::istringstream b("Task_success_rate,Energy,scaling_speed,Positional_error\n1,30,0.5,0.2\n");
    const auto da = read_dataset(a, speed_space(), appendix_roles());
    const auto db = read_dataset(b, speed_space(), appendix_roles());
    EXPECT_EQ(da, db);
}

TEST(Data, ZeroRowsRejected) {
    std::istringstream in("scaling_speed,Energy,Positional_error,Task_success_rate\n");
    EXPECT_THROW(read_dataset(in, speed_space(), appendix_roles()), DataError);
}

TEST(Data, MissingRoleRejected) {
    std::istringstream in("scaling_speed,Energy,Mystery\n0.5,1,2\n");
    EXPECT_THROW(read_dataset(in, speed_space(), {{"Energy", Role::objective}}), DataError);
}

TEST(Data, UnparsableCellNamesRow) {
    std::istringstream in("scaling_speed,Energy\n0.5,1\n0.7,abc\n");
    try {
        read_dataset(in, speed_space(), {{"Energy", Role::objective}});
        FAIL() << "expected a data error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
    }
}

TEST(Data, OutOfDomainOptionRejected) {
    std::istringstream in("scaling_speed,Energy\n5.0,1\n");
    EXPECT_THROW(read_dataset(in, speed_space(), {{"Energy", Role::objective}}), DataError);
}

TEST(Data, SuccessFlagMustBeBinary) {
    std::istringstream in("scaling_speed,Task_success_rate\n0.5,0.5\n");
    EXPECT_THROW(read_dataset(in, speed_space(), {{"Task_success_rate", Role::success_flag}}), DataError);
}

TEST(Data, WriteThenLoadRoundTripIsExact) {
    auto space = std::make_shared<const ConfigSpace>(std::vector<OptionDef>{
        OptionDef::continuous("x", 0.0, 1.0, 0.5), OptionDef::integer("n", 1, 9, 5), OptionDef::categorical("c", {"a", "b", "c"}, 0)});
    Rng rng(17);
    const auto cs = sample_uniform(*space, 40, rng);
    std::vector<Column> cols{{"x", Role::option, {}}, {"n", Role::option, {}}, {"c", Role::option, {}}, {"y", Role::objective, {}}};
    for (const auto& c : cs) {
        cols[0].values.push_back(to_numeric(c.at("x")));
        cols[1].values.push_back(to_numeric(c.at("n")));
        cols[2].values.push_back(to_numeric(c.at("c")));
        cols[3].values.push_back(rng.normal() * 1e3 + 1.0 / 3.0);
    }
    const Dataset ds(cols, space);
    std::stringstream buf;
    write_dataset(ds, buf);
    const auto back = read_dataset(buf, space, {{"y", Role::objective}});
    EXPECT_EQ(back, ds);
}

TEST(Data, StandardizeMatchesZScores) {
    const Dataset ds({{"v", Role::system_metric, {1.0, 2.0, 3.0}}});
    const auto st = standardize(ds, {"v"});
    const auto v = st.data.values("v");
    EXPECT_NEAR(v[0], -1.0, 1e-12);
    EXPECT_NEAR(v[1], 0.0, 1e-12);
    EXPECT_NEAR(v[2], 1.0, 1e-12);
    EXPECT_NEAR(st.scaling[0].mean, 2.0, 1e-12);
    EXPECT_NEAR(st.scaling[0].sd, 1.0, 1e-12);
}

TEST(Data, StandardizeMomentsAndIdempotence) {
    Rng rng(5);
    std::vector<double> x(200);
    for (auto& v : x) v = rng.normal(7.0, 3.0);
    const Dataset ds({{"v", Role::system_metric, x}});
    const auto once = standardize(ds, {"v"});
    EXPECT_NEAR(sample_mean(once.data.values("v")), 0.0, 1e-9);
    EXPECT_NEAR(sample_sd(once.data.values("v")), 1.0, 1e-9);
    const auto twice = standardize(once.data, {"v"});
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(twice.data.values("v")[i], once.data.values("v")[i], 1e-9);
}

TEST(Data, StandardizeRejectsConstantColumn) {
    const Dataset ds({{"flat", Role::system_metric, {2.0, 2.0, 2.0}}});
    try {
        standardize(ds, {"flat"});
        FAIL() << "expected a data error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
    }
}

TEST(Data, StandardizeIsInvertible) {
    Rng rng(8);
    std::vector<double> a(100), b(100);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(-50.0, 50.0);
        b[i] = rng.normal(1e3, 10.0);
    }
    const Dataset ds({{"a", Role::objective, a}, {"b", Role::system_metric, b}});
    const auto st = standardize(ds, {"a", "b"});
    const auto back = unstandardize(st.data, st.scaling);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(back.values("a")[i], a[i], 1e-9);
        EXPECT_NEAR(back.values("b")[i], b[i], 1e-9);
    }
}

TEST(Data, RowConfigurationUsesDefaultsForAbsentOptions) {
    auto space = std::make_shared<const ConfigSpace>(std::vector<OptionDef>{OptionDef::continuous("x", 0.0, 1.0, 0.5),
                                                                            OptionDef::integer("pinned", 1, 1, 1, true)});
    const Dataset ds({{"x", Role::option, {0.25}}, {"y", Role::objective, {1.0}}}, space);
    const auto c = ds.configuration(0);
    EXPECT_EQ(std::get<double>(c.at("x")), 0.25);
    EXPECT_EQ(std::get<std::int64_t>(c.at("pinned")), 1);
}

#include "cli.hpp"
#include "lotcycle/json_io.hpp"
#include "lotcycle/sosi.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lotcycle;
using lotcycle::cli::run_cli;

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("lotcycle_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        unsetenv("LOTCYCLE_TIME_LIMIT_SECS");
    }
    void TearDown() override {
        fs::remove_all(dir_);
        unsetenv("LOTCYCLE_TIME_LIMIT_SECS");
    }

    std::string write(const std::string& name, const std::string& text) {
        const auto path = (dir_ / name).string();
        std::ofstream(path) << text;
        return path;
    }

    std::string write(const std::string& name, const Json& doc) { return write(name, doc.dump()); }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return run_cli(args, out_, err_);
    }

    Json output() const { return parse_json_text(out_.str()); }

    std::string toy() { return write("toy.json", instance_to_json(fixtures::single(1, 1, 1, 10))); }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST(JsonIo, InstanceRoundTrip) {
    Instance inst{{fixtures::commodity(1, Rational(3, 7), 2, Rational(1, 3)), fixtures::commodity(2, 5, 1, 0)},
                  Rational(9, 2)};
    auto back = instance_from_json(parse_json_text(instance_to_json(inst).dump()));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.capacity, inst.capacity);
    EXPECT_EQ(back.commodities[0].order_cost, Rational(3, 7));
    EXPECT_EQ(back.commodities[1].space_per_unit, Rational(0));
    EXPECT_EQ(lower_bound(back), lower_bound(inst));
}

TEST(JsonIo, AcceptsIntegersAndDecimals) {
    auto inst = instance_from_json(parse_json_text(
        R"({"capacity": 10, "commodities": [{"id": 1, "order_cost": "0.5", "holding_rate": 2, "space_per_unit": "1/1"}]})"));
    EXPECT_EQ(inst.capacity, Rational(10));
    EXPECT_EQ(inst.commodities[0].order_cost, Rational(1, 2));
    EXPECT_EQ(inst.commodities[0].holding_rate, Rational(2));
}

TEST(JsonIo, PolicyRoundTripPreservesEvaluation) {
    auto doc = parse_json_text(R"({"grid_size": 64, "cycle_length": "5/2", "orders": {"1":[0,16,32,48], "2":[0,32]}})");
    auto p = policy_from_json(doc);
    auto inst = fixtures::identical(2, 1, 1, 1, 10);
    auto again = policy_from_json(parse_json_text(policy_to_json(p).dump()));
    EXPECT_EQ(again.orders, p.orders);
    EXPECT_EQ(evaluate_cycle(again, inst).average, evaluate_cycle(p, inst).average);
}

TEST(JsonIo, RejectsMalformedDocuments) {
    EXPECT_THROW(parse_json_text("{bad"), std::invalid_argument);
    EXPECT_THROW(instance_from_json(parse_json_text(R"({"commodities": []})")), std::invalid_argument);
    EXPECT_THROW(policy_from_json(parse_json_text(R"({"grid_size": 4, "cycle_length": "1", "orders": {"x": [0]}})")),
                 std::invalid_argument);
    EXPECT_THROW(policy_from_json(parse_json_text(R"({"grid_size": 4, "cycle_length": "1", "orders": {"1": [3, 1]}})")),
                 std::invalid_argument);
    EXPECT_THROW(rational_from_json(parse_json_text("1.5")), std::invalid_argument);
}

TEST(JsonIo, PartitionRoundTrip) {
    FrequencyPartition p;
    p.base = 3;
    p.shape = GridShape{1, 1, -1};
    p.class_of = {{1, 1}, {2, 3}};
    EXPECT_EQ(partition_from_json(parse_json_text(partition_to_json(p).dump())), p);
    EXPECT_THROW(partition_from_json(parse_json_text(R"({"base": 2, "classes": {"1": 0}})")), std::invalid_argument);
}

TEST_F(CliTest, GenIsDeterministic) {
    ASSERT_EQ(run({"gen", "--seed", "1", "--n", "2", "--rho", "0.8"}), 0);
    const std::string first = out_.str();
    ASSERT_EQ(run({"gen", "--seed", "1", "--n", "2", "--rho", "0.8"}), 0);
    EXPECT_EQ(out_.str(), first);
    EXPECT_EQ(instance_from_json(output()).size(), 2u);
    const auto path = (dir_ / "g.json").string();
    ASSERT_EQ(run({"gen", "--seed", "1", "--n", "2", "--rho", "0.8", "-o", path}), 0);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), first);
}

TEST_F(CliTest, GenTightness) {
    ASSERT_EQ(run({"gen", "--seed", "4", "--n", "3", "--rho", "10"}), 0);
    for (const auto& t : capacity_constrained_sosi(instance_from_json(output()))) EXPECT_FALSE(t.capacity_binding);
    ASSERT_EQ(run({"gen", "--seed", "4", "--n", "3", "--rho", "0.1"}), 0);
    const auto inst = instance_from_json(output());
    bool bound = false;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const auto t = capacity_constrained_sosi(inst)[i];
        const auto& c = inst.commodities[i];
        bound = bound || t.value < eoq_optimal_interval(to_double(c.order_cost), to_double(c.holding_rate));
    }
    EXPECT_TRUE(bound);
}

TEST_F(CliTest, GenRejectsBadRanges) {
    EXPECT_EQ(run({"gen", "--seed", "1", "--order-cost", "5", "1"}), 1);
    EXPECT_EQ(run({"gen", "--seed", "1", "--space", "0", "1"}), 1);
    EXPECT_EQ(run({"gen", "--n", "2"}), 1);
}

TEST_F(CliTest, SolveToy) {
    ASSERT_EQ(run({"solve", toy(), "--base", "2"}), 0);
    auto doc = output();
    EXPECT_EQ(doc["status"], "solved");
    EXPECT_GE(doc["lb_ratio"].get<double>(), 1.0 - 1e-12);
    EXPECT_TRUE(doc.contains("policy"));
    EXPECT_TRUE(doc["counters"].contains("states_expanded"));
    EXPECT_NE(err_.str().find("solved"), std::string::npos);
}

TEST_F(CliTest, SolveExitCodes) {
    EXPECT_EQ(run({"solve", toy(), "--base", "2", "--state-cap", "1"}), 3);
    EXPECT_EQ(output()["status"], "resource_cap_hit");
    const auto bad = write("bad.json", std::string("{bad"));
    EXPECT_EQ(run({"solve", bad}), 1);
    EXPECT_NE(err_.str().find("malformed"), std::string::npos);
    EXPECT_TRUE(out_.str().empty());
    EXPECT_EQ(run({"solve", (dir_ / "missing.json").string()}), 1);
    const auto tiny = write("tiny.json", instance_to_json(fixtures::single(1, 1, 1, 1)));
    const auto part = write("part.json", std::string(R"({"base": 2, "classes": {"1": 1}})"));
    EXPECT_EQ(run({"solve", tiny, "--partition", part, "--cycle", "100"}), 2);
    EXPECT_EQ(output()["status"], "infeasible_enumeration");
    EXPECT_EQ(run({"solve", toy(), "--search", "sideways"}), 1);
    EXPECT_EQ(run({"frobnicate"}), 1);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, SolveWritesTrace) {
    const auto trace = (dir_ / "trace.jsonl").string();
    ASSERT_EQ(run({"solve", toy(), "--base", "2", "--cycle", "1", "--trace", trace}), 0);
    const auto states = output()["counters"]["states_expanded"].get<std::int64_t>();
    std::ifstream in(trace);
    std::string line;
    std::int64_t lines = 0;
    while (std::getline(in, line)) {
        EXPECT_TRUE(parse_json_text(line).contains("L_index"));
        ++lines;
    }
    EXPECT_EQ(lines, states);
}

TEST_F(CliTest, TimeLimitEnvironment) {
    setenv("LOTCYCLE_TIME_LIMIT_SECS", "abc", 1);
    EXPECT_EQ(run({"solve", toy(), "--base", "2"}), 1);
    setenv("LOTCYCLE_TIME_LIMIT_SECS", "30", 1);
    EXPECT_EQ(run({"solve", toy(), "--base", "2"}), 0);
    setenv("LOTCYCLE_TIME_LIMIT_SECS", "1e-9", 1);
    EXPECT_EQ(run({"solve", toy(), "--base", "2", "--time-limit", "100"}), 3);
}

TEST_F(CliTest, EvaluateSosiFixture) {
    const auto policy = write("p.json", std::string(R"({"grid_size": 1, "cycle_length": "1", "orders": {"1": [0]}})"));
    ASSERT_EQ(run({"evaluate", toy(), policy}), 0);
    auto doc = output();
    EXPECT_EQ(doc["cost"]["average"], "2/1");
    EXPECT_TRUE(doc["feasible"].get<bool>());
    const auto other = write("q.json", std::string(R"({"grid_size": 1, "cycle_length": "1", "orders": {"2": [0]}})"));
    EXPECT_EQ(run({"evaluate", toy(), other}), 1);
}

TEST_F(CliTest, BaselineSymmetric) {
    const auto inst = fixtures::identical(2, 1, 1, 1, 1);
    ASSERT_EQ(run({"baseline", write("sym.json", instance_to_json(inst))}), 0);
    auto doc = output();
    auto policy = policy_from_json(doc["policy"]);
    EXPECT_TRUE(check_capacity(policy, inst).feasible);
    EXPECT_LE(evaluate_cycle(policy, inst).average_value(), std::sqrt(2.0) * 2 * lower_bound(inst) + 1e-12);
}

TEST_F(CliTest, AlignProducesAlignedPolicy) {
    const auto inst = write("i.json", instance_to_json(fixtures::identical(2, 1, 1, 1, 10)));
    const auto policy = write(
        "p.json", std::string(R"({"grid_size": 20, "cycle_length": "1", "orders": {"1": [6, 11], "2": [0, 3, 9, 15]}})"));
    ASSERT_EQ(run({"align", inst, policy, "--base", "2", "--shape", "1,1,-1"}), 0);
    auto doc = output();
    EXPECT_TRUE(doc["aligned"].get<bool>());
    EXPECT_EQ(doc["policy"]["orders"]["1"], Json::array({0, 4, 6}));
    EXPECT_EQ(run({"align", inst, policy, "--shape", "1,2"}), 1);
}

TEST_F(CliTest, OracleModes) {
    ASSERT_EQ(run({"oracle", toy(), "--grid-size", "4", "--cycle", "2"}), 0);
    EXPECT_DOUBLE_EQ(output()["average_cost"].get<double>(), 2.0);
    const auto part = write("part.json", std::string(R"({"base": 2, "shape": [1, 1, -1], "classes": {"1": 1}})"));
    ASSERT_EQ(run({"oracle", toy(), "--mode", "aligned", "--partition", part, "--cycle", "2"}), 0);
    EXPECT_EQ(output()["examined"], 8);
    EXPECT_EQ(run({"oracle", toy(), "--grid-size", "40", "--cycle", "2"}), 3);
    const auto tight = write("t.json", instance_to_json(fixtures::single(1, 1, 1, Rational(1, 4))));
    EXPECT_EQ(run({"oracle", tight, "--grid-size", "4", "--cycle", "2"}), 2);
    EXPECT_EQ(run({"oracle", toy(), "--grid-size", "4"}), 1);
}

TEST_F(CliTest, CompareColumns) {
    ASSERT_EQ(run({"compare", toy(), "--base", "2"}), 0);
    std::map<std::string, double> value;
    for (const auto& row : output()["rows"]) {
        ASSERT_FALSE(row["average_cost"].is_null()) << row["method"];
        value[row["method"].get<std::string>()] = row["average_cost"].get<double>();
    }
    EXPECT_LE(value["lower_bound"], value["oracle"] + 1e-12);
    EXPECT_LE(value["oracle"], value["dp"] + 1e-12);
    EXPECT_LE(value["dp"], value["baseline"] + 1e-12);
    EXPECT_NE(err_.str().find("baseline"), std::string::npos);
}

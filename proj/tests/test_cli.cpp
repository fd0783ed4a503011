#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "wie/cli.hpp"

namespace fs = std::filesystem;

namespace wie {
namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t scenario_error_line(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

constexpr const char* kValid = R"(scenario: t
problem: {m: 1.0, u0: [0.0], v0: [1.0]}
force:
  kind: constant
  value: [1.0]
sweep: {h: [2, 4]}
)";

TEST(Scenario, ParsesEveryShippedScenario) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(WIE_SCENARIO_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        ++count;
        EXPECT_NO_THROW({
            const auto sc = load_scenario(entry.path());
            EXPECT_FALSE(sc.name.empty());
            EXPECT_FALSE(sc.h_values.empty());
        }) << entry.path();
    }
    EXPECT_GE(count, 5);
}

TEST(Scenario, Defaults) {
    const auto sc = parse_scenario(kValid);
    EXPECT_EQ(sc.name, "t");
    EXPECT_EQ(sc.h_values, (std::vector<int>{2, 4}));
    EXPECT_EQ(sc.solver.T_view, 2.0);
    EXPECT_EQ(sc.solver.ds, 0.25);
    EXPECT_EQ(sc.problem.force.kind(), ForceKind::constant);
    EXPECT_TRUE(sc.wants("csv"));
    EXPECT_TRUE(sc.wants("json"));
}

TEST(Scenario, ErrorsCarryTheLine) {
    EXPECT_EQ(scenario_error_line(std::string(kValid) + "bogus: 1\n"), 7u);
    EXPECT_EQ(scenario_error_line("scenario: t\nproblem: {m: -1.0, u0: [0.0], v0: [1.0]}\nforce: {kind: zero}\n"), 2u);
    EXPECT_EQ(scenario_error_line("scenario: t\nproblem: {m: 1.0, u0: [0.0], v0: [1.0]}\nforce:\n  kind: warp\n"), 4u);
    EXPECT_EQ(scenario_error_line(
                  "scenario: t\nproblem: {m: 1.0, u0: [0.0], v0: [1.0]}\nforce: {kind: zero}\nsweep: {h: [4, 2]}\n"),
              4u);
    EXPECT_EQ(scenario_error_line("scenario: t\nproblem: {m: 1.0, u0: [0.0], v0: [1.0]}\nforce: {kind: zero}\n"
                                  "solver: {ds: 2.0}\n"),
              4u);
    EXPECT_EQ(scenario_error_line("scenario: t\nproblem: {m: 1.0, u0: [0.0, 1.0], v0: [1.0]}\nforce: {kind: zero}\n"), 2u);
    EXPECT_NE(scenario_error_line("scenario: [unclosed\n"), 0u);
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("wie_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::setenv("WIE_OUTPUT_DIR", dir_.c_str(), 1);
    }
    void TearDown() override {
        ::unsetenv("WIE_OUTPUT_DIR");
        fs::remove_all(dir_);
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "wie");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        out_.str("");
        err_.str("");
        return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string scenario(const std::string& name) { return std::string(WIE_SCENARIO_DIR) + "/" + name; }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

TEST_F(CliTest, SolveWritesTrajectoryAndMetrics) {
    ASSERT_EQ(run({"solve", "--config", scenario("sin-fixed.yaml"), "--h", "8"}), 0) << err_.str();
    const auto csv = slurp(dir_ / "sin-fixed_h8_trajectory.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, "t,y_1,dy_1,d2y_1");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    EXPECT_EQ(rows, 401);

    const auto metrics = nlohmann::json::parse(slurp(dir_ / "sin-fixed_h8_metrics.json"));
    EXPECT_EQ(metrics["scenario"], "sin-fixed");
    EXPECT_EQ(metrics["h"], 8);
    for (const char* key : {"sup_err_y", "sup_err_dy", "weakstar_gap_ypp", "el_residual"})
        EXPECT_TRUE(metrics[key].is_number()) << key;
    EXPECT_LE(metrics["el_residual"].get<double>(), 1e-10);
    for (const auto& check : metrics["checks"]) EXPECT_TRUE(check["passed"].get<bool>()) << check["name"];
}

TEST_F(CliTest, SolveIsByteIdenticalAcrossRuns) {
    ASSERT_EQ(run({"solve", "--config", scenario("weakstar-null.yaml"), "--h", "16"}), 0);
    const auto first_csv = slurp(dir_ / "weakstar-null_h16_trajectory.csv");
    const auto first_json = slurp(dir_ / "weakstar-null_h16_metrics.json");
    ASSERT_EQ(run({"solve", "--config", scenario("weakstar-null.yaml"), "--h", "16"}), 0);
    EXPECT_EQ(first_csv, slurp(dir_ / "weakstar-null_h16_trajectory.csv"));
    EXPECT_EQ(first_json, slurp(dir_ / "weakstar-null_h16_metrics.json"));
}

TEST_F(CliTest, SweepWritesReports) {
    ASSERT_EQ(run({"sweep", "--config", scenario("constant-force.yaml")}), 0) << err_.str();
    const auto summary = nlohmann::json::parse(slurp(dir_ / "constant-force_sweep.json"));
    EXPECT_EQ(summary["scenario"], "constant-force");
    EXPECT_FALSE(summary["h_values"].empty());
    const auto csv = slurp(dir_ / "constant-force_sweep.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "h,sup_err_y,sup_err_dy,weakstar_gap_ypp,el_residual");
}

TEST_F(CliTest, ConfigurationErrorsExitTwo) {
    EXPECT_EQ(run({"solve", "--config", "/nonexistent.yaml", "--h", "4"}), 2);
    EXPECT_EQ(run({"solve", "--config", scenario("sin-fixed.yaml"), "--h", "0"}), 2);
    EXPECT_EQ(run({"solve", "--config", scenario("sin-fixed.yaml"), "--h", "400"}), 2);
    EXPECT_NE(err_.str().find("700"), std::string::npos);
    EXPECT_EQ(run({"solve", "--config", scenario("sin-fixed.yaml")}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);

    const auto bad = dir_ / "bad.yaml";
    std::ofstream(bad) << kValid << "extra: 1\n";
    EXPECT_EQ(run({"sweep", "--config", bad.string()}), 2);
    EXPECT_NE(err_.str().find("line 7"), std::string::npos) << err_.str();

    const auto no_sweep = dir_ / "no_sweep.yaml";
    std::ofstream(no_sweep) << "scenario: t\nproblem: {m: 1.0, u0: [0.0], v0: [1.0]}\nforce: {kind: zero}\n";
    EXPECT_EQ(run({"sweep", "--config", no_sweep.string()}), 2);
}

TEST_F(CliTest, VerifyReportsEveryGroup) {
    ASSERT_EQ(run({"verify", "--seed", "3"}), 0) << err_.str();
    const auto report = nlohmann::json::parse(out_.str());
    EXPECT_EQ(report["seed"], 3);
    EXPECT_TRUE(report["passed"].get<bool>());
    std::set<std::string> names;
    for (const auto& check : report["checks"]) names.insert(check["name"].get<std::string>());
    EXPECT_GE(names.size(), 6u);
    for (const char* name : {"lemma21-first", "lemma21-second", "kernel-normalization", "scaling-identity",
                             "supnorm-bound", "exactness"})
        EXPECT_TRUE(names.count(name)) << name;
}

TEST_F(CliTest, VerifyNamesAnInjectedFault) {
    EXPECT_EQ(run({"verify", "--seed", "3", "--inject-fault", "lemma21-first"}), 1);
    EXPECT_NE(err_.str().find("FAILED: lemma21-first"), std::string::npos) << err_.str();
    EXPECT_EQ(err_.str().find("FAILED: lemma21-second"), std::string::npos);
}

int exit_status(const std::string& command) {
    const int raw = std::system(command.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

TEST_F(CliTest, ToolExitCodes) {
    const std::string tool = WIE_TOOL_PATH;
    EXPECT_EQ(exit_status(tool + " solve --config " + scenario("zero-force.yaml") + " --h 4 > /dev/null"), 0);
    EXPECT_TRUE(fs::exists(dir_ / "zero-force_h4_trajectory.csv"));
    EXPECT_EQ(exit_status(tool + " solve --config /nonexistent.yaml --h 4 2> /dev/null"), 2);
    EXPECT_EQ(exit_status(tool + " 2> /dev/null > /dev/null"), 2);
    EXPECT_EQ(exit_status(tool + " --help > /dev/null"), 0);
}

}  // namespace
}  // namespace wie

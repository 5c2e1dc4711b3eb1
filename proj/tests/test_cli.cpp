#include "blinktrack/cli.hpp"
#include "blinktrack/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace blinktrack;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("blinktrack_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  int cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

const char* kScenario = R"({
  "name": "cli_car",
  "seed": 5,
  "duration": 20,
  "user": {"mode": "walking", "speed": 1.4},
  "vehicles": [
    {"class": "car", "x": 2.0, "z": 45.0, "speed": 9.0, "spawn_time": 1.0},
    {"class": "cycle", "x": -1.5, "z": 30.0, "speed": 4.0, "spawn_time": 6.0}
  ]
})";

}  // namespace

TEST_F(Cli, GenerateWritesTraceAndTruthDeterministically) {
  const auto cfg = write("scenario.json", kScenario);
  ASSERT_EQ(cli({"generate", "--config", cfg, "--out", path("a")}), kExitOk) << err_.str();
  ASSERT_EQ(cli({"generate", "--config", cfg, "--out", path("b")}), kExitOk) << err_.str();
  const auto trace_a = slurp(path("a/cli_car.trace.jsonl"));
  EXPECT_FALSE(trace_a.empty());
  EXPECT_FALSE(slurp(path("a/cli_car.truth.jsonl")).empty());
  EXPECT_EQ(trace_a, slurp(path("b/cli_car.trace.jsonl")));
  EXPECT_EQ(slurp(path("a/cli_car.truth.jsonl")), slurp(path("b/cli_car.truth.jsonl")));

  ASSERT_EQ(cli({"generate", "--config", cfg, "--out", path("c"), "--seed", "6"}), kExitOk);
  EXPECT_NE(trace_a, slurp(path("c/cli_car.trace.jsonl")));
}

TEST_F(Cli, InvalidConfigExitsTwoWithFieldDiagnostic) {
  const auto bad_fov = write("bad.json", R"({"detector": {"fov": 4.0}})");
  EXPECT_EQ(cli({"generate", "--config", bad_fov, "--out", path("o")}), kExitConfig);
  EXPECT_NE(err_.str().find("detector.fov"), std::string::npos) << err_.str();

  const auto unknown = write("unknown.json", R"({"duraton": 5})");
  EXPECT_EQ(cli({"generate", "--config", unknown, "--out", path("o")}), kExitConfig);
  EXPECT_NE(err_.str().find("duraton"), std::string::npos) << err_.str();

  const auto wrong_type = write("type.json", R"({"scenario": {"duration": "long"}, "sampler": "sarsa"})");
  EXPECT_EQ(cli({"run", "--config", wrong_type, "--out", path("o")}), kExitConfig);
  EXPECT_NE(err_.str().find("scenario.duration"), std::string::npos) << err_.str();

  EXPECT_EQ(cli({"run"}), kExitConfig);  // --config is required
  EXPECT_EQ(cli({"bogus"}), kExitConfig);
}

TEST_F(Cli, RunSarsaWritesReportAndQtableAndReplays) {
  write("scenario.json", kScenario);
  const auto cfg = write("run.json", R"({"scenario": "scenario.json", "sampler": {"kind": "sarsa"},
                                         "seed": 3, "eval": {"warmup_s": 5}})");
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", path("first")}), kExitOk) << err_.str();
  const auto report = slurp(path("first/report.jsonl"));
  EXPECT_NE(report.find("\"format\":\"blinktrack-report\""), std::string::npos) << report;
  EXPECT_NE(report.find("\"blink_fraction\""), std::string::npos);
  EXPECT_TRUE(fs::exists(path("first/events.jsonl")));
  const auto table = QTable::load_file(path("first/qtable.txt"));
  EXPECT_EQ(table.tick(), 200u);

  const auto replay = write("replay.json", R"({"scenario": "scenario.json", "sampler": "sarsa",
                                               "qtable": ")" + path("first/qtable.txt") + R"(",
                                               "seed": 3, "eval": {"warmup_s": 5}})");
  ASSERT_EQ(cli({"run", "--config", replay, "--out", path("second")}), kExitOk) << err_.str();
  EXPECT_EQ(QTable::load_file(path("second/qtable.txt")).tick(), 400u);
}

TEST_F(Cli, RunOnGeneratedTraceFiles) {
  const auto sc = write("scenario.json", kScenario);
  ASSERT_EQ(cli({"generate", "--config", sc, "--out", path("data")}), kExitOk);
  const auto cfg = write("run.json", R"({"trace": "data/cli_car.trace.jsonl", "truth": "data/cli_car.truth.jsonl",
                                         "sampler": {"kind": "interval", "interval_s": 0.3}, "eval": {"warmup_s": 2}})");
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", path("r")}), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("report.jsonl"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("r/qtable.txt")));
}

TEST_F(Cli, MissingTraceExitsThreeNamingThePath) {
  const auto cfg = write("run.json", R"({"trace": "nowhere/t.jsonl", "truth": "nowhere/u.jsonl"})");
  EXPECT_EQ(cli({"run", "--config", cfg, "--out", path("o")}), kExitIo);
  EXPECT_NE(err_.str().find("nowhere/t.jsonl"), std::string::npos) << err_.str();

  EXPECT_EQ(cli({"run", "--config", path("absent.json")}), kExitIo);
  EXPECT_NE(err_.str().find("absent.json"), std::string::npos) << err_.str();

  const auto truncated = write("t.trace.jsonl", "{\"format\":\"blinktrack-trace\"");
  const auto cfg2 = write("run2.json", R"({"trace": "t.trace.jsonl", "truth": "t.trace.jsonl"})");
  EXPECT_EQ(cli({"run", "--config", cfg2, "--out", path("o")}), kExitIo);
  (void)truncated;
}

TEST_F(Cli, UnknownSamplerIsRejected) {
  write("scenario.json", kScenario);
  const auto cfg = write("run.json", R"({"scenario": "scenario.json", "sampler": "adaptive"})");
  EXPECT_NE(cli({"run", "--config", cfg, "--out", path("o")}), kExitOk);
  EXPECT_NE(err_.str().find("adaptive"), std::string::npos) << err_.str();

  const auto ok = write("ok.json", R"({"scenario": "scenario.json"})");
  EXPECT_EQ(cli({"run", "--config", ok, "--out", path("o"), "--sampler", "magic"}), kExitConfig);
}

TEST_F(Cli, CompareWritesMachineAndHumanReports) {
  const auto cfg = write("suite.json", R"({"standard_suite": {"base_seed": 2, "count": 3, "duration": 30},
                                           "samplers": ["every_frame", "interval", "sarsa"],
                                           "seeds": [1, 2], "match_budget": true,
                                           "eval": {"warmup_s": 10}})");
  ASSERT_EQ(cli({"compare", "--config", cfg, "--out", path("cmp"), "--workers", "2"}), kExitOk) << err_.str();
  const auto lines = slurp(path("cmp/comparison.jsonl"));
  std::size_t rows = 0;
  std::istringstream in(lines);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) rows += line.find("\"summary\"") == std::string::npos &&
                                         line.find("\"breakdown\"") == std::string::npos;
  EXPECT_EQ(rows, 18u);
  const auto summary = slurp(path("cmp/summary.txt"));
  EXPECT_NE(summary.find("sarsa"), std::string::npos);
  EXPECT_NE(summary.find("every_frame"), std::string::npos);

  // Worker count does not change the output.
  ASSERT_EQ(cli({"compare", "--config", cfg, "--out", path("cmp1"), "--workers", "1"}), kExitOk);
  EXPECT_EQ(lines, slurp(path("cmp1/comparison.jsonl")));

  const auto empty = write("empty.json", R"({"standard_suite": {"count": 1, "duration": 10}, "samplers": []})");
  EXPECT_EQ(cli({"compare", "--config", empty, "--out", path("e")}), kExitConfig);
}

TEST_F(Cli, RunIsByteIdenticalAcrossRepeats) {
  write("scenario.json", kScenario);
  const auto cfg = write("run.json", R"({"scenario": "scenario.json", "sampler": "sarsa", "seed": 11,
                                         "eval": {"warmup_s": 4}})");
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", path("x")}), kExitOk);
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", path("y")}), kExitOk);
  for (const char* f : {"report.jsonl", "events.jsonl", "qtable.txt"}) {
    EXPECT_EQ(slurp(path(std::string("x/") + f)), slurp(path(std::string("y/") + f))) << f;
  }
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", path("z"), "--seed", "12"}), kExitOk);
  EXPECT_NE(slurp(path("x/qtable.txt")), slurp(path("z/qtable.txt")));
}

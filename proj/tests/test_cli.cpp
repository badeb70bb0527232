#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dvrp/cli.hpp"
#include "dvrp/instance_io.hpp"
#include "dvrp/valuenet.hpp"
#include "helpers.hpp"

using namespace dvrp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dvrp");
  std::vector<char*> argv;
  for (auto& a : args) {
    argv.push_back(a.data());
  }
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dvrp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, NoCommandIsUsageError) { EXPECT_EQ(cli({}).code, kExitUsage); }

TEST_F(CliTest, HelpSucceeds) { EXPECT_EQ(cli({"--help"}).code, kExitOk); }

TEST_F(CliTest, TrainWithoutConfigIsUsageError) {
  EXPECT_EQ(cli({"train", "--out", path("w.txt")}).code, kExitUsage);
}

TEST_F(CliTest, UnknownConfigKeyIsParseError) {
  std::ofstream(path("bad.json")) << R"({"train": {"episodez": 3}})";
  auto r = cli({"train", "--config", path("bad.json"), "--out", path("w.txt")});
  EXPECT_EQ(r.code, kExitParse);
  EXPECT_NE(r.err.find("episodez"), std::string::npos);
}

TEST_F(CliTest, BrokenInstanceIsParseError) {
  std::ofstream(path("broken.txt")) << "C101\n\nVEHICLE\nNUMBER CAPACITY\n 2 x\n";
  EXPECT_EQ(cli({"solve", "--instance", path("broken.txt"), "--algorithm", "ga"}).code, kExitParse);
}

TEST_F(CliTest, WrongWeightShapeIsParseError) {
  save_weights(path("w.txt"), Network::initialized(0, {12, 8, 1}));
  auto r = cli({"solve", "--instance", dvrp::testing::solomon("C101"), "--first-n", "5", "--weights", path("w.txt")});
  EXPECT_EQ(r.code, kExitParse);
  EXPECT_NE(r.err.find("12,6,3,1"), std::string::npos);
}

TEST_F(CliTest, ValidateReportsFailures) {
  auto inst = load_solomon(dvrp::testing::solomon("C101"), 5);
  write_instance(path("i.json"), inst);
  ASSERT_EQ(cli({"solve", "--instance", path("i.json"), "--algorithm", "ga", "--out", path("s.json")}).code,
            kExitOk);
  EXPECT_EQ(cli({"validate", "--instance", path("i.json"), "--solution", path("s.json")}).code, kExitOk);
  auto sol = read_solution(path("s.json"));
  sol.routes[0].visits[0].service_start += 5000;
  write_solution(path("bad.json"), sol, false);
  auto r = cli({"validate", "--instance", path("i.json"), "--solution", path("bad.json")});
  EXPECT_EQ(r.code, kExitInvalid);
  EXPECT_NE(r.out.find("status="), std::string::npos);
}

TEST_F(CliTest, OracleInfeasibleExitCode) {
  auto inst = dvrp::testing::make_instance({{3, 4, 1, 0, 100}, {30, 40, 1, 0, 10}}, 2, 100);
  write_instance(path("i.json"), inst);
  EXPECT_EQ(cli({"oracle", "--instance", path("i.json")}).code, kExitInfeasible);
  auto ok = dvrp::testing::make_instance({{3, 4, 1, 0, 100}}, 2, 100);
  write_instance(path("ok.json"), ok);
  auto r = cli({"oracle", "--instance", path("ok.json"), "--out", path("o.json")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_DOUBLE_EQ(read_solution(path("o.json")).total_distance, 10.0);
}

TEST_F(CliTest, ExportMilpWritesFile) {
  auto inst = dvrp::testing::make_instance({{3, 4, 1, 0, 100}, {-3, 4, 1, 0, 100}}, 2, 100);
  write_instance(path("i.json"), inst);
  ASSERT_EQ(cli({"export-milp", "--instance", path("i.json"), "--out", path("m.lp")}).code, kExitOk);
  EXPECT_NE(slurp(path("m.lp")).find("Subject To"), std::string::npos);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(cli({"generate", "--seed", "3", "--count", "2", "--dynamicity", "0.3", "--out-dir", path(d)}).code,
              kExitOk);
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(path("a"))) {
    EXPECT_EQ(slurp(e.path()), slurp(fs::path(path("b")) / e.path().filename()));
    ++files;
  }
  EXPECT_EQ(files, 2);
}

TEST_F(CliTest, DynamicAtZeroMatchesSolve) {
  save_weights(path("w.txt"), Network::initialized(4));
  const auto inst = dvrp::testing::solomon("R101");
  ASSERT_EQ(cli({"solve", "--instance", inst, "--first-n", "25", "--weights", path("w.txt"), "--out",
                 path("s.json")})
                .code,
            kExitOk);
  auto r = cli({"dynamic", "--instance", inst, "--first-n", "25", "--weights", path("w.txt"),
                "--dynamicity", "0", "--out", path("d.json")});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(slurp(path("s.json")), slurp(path("d.json")));
  EXPECT_NE(r.out.find("max_sec"), std::string::npos);
}

TEST_F(CliTest, BenchEmptyMatchIsError) {
  EXPECT_EQ(cli({"bench", "--dir", dvrp::testing::data_dir() + "/solomon", "--pattern", "^nothing$",
                 "--algorithms", "ga"})
                .code,
            kExitError);
}

TEST_F(CliTest, BenchReportRecomputesFromRows) {
  auto r = cli({"bench", "--dir", dvrp::testing::data_dir() + "/solomon", "--pattern", "^C10[1-3]", "--algorithms",
                "ga", "--first-n", "10", "--rows", path("rows.csv"), "--report", path("rep.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(path("rows.csv"));
  auto rows = read_results_csv(in);
  ASSERT_EQ(rows.size(), 3u);
  std::ostringstream again;
  write_report_csv(again, aggregate_results(rows), false);
  EXPECT_EQ(again.str(), slurp(path("rep.csv")));
}

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "urnsync/cli.hpp"

using namespace urnsync;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliFiles : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("urnsync-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

nlohmann::json embedded_config(const std::string& csv_text) {
  std::istringstream is(csv_text);
  return io::read_csv(is).first.config;
}

} // namespace

TEST(Cli, MomentsFirstRow) {
  const auto r = cli({"moments", "--n", "2", "--a", "1", "--b", "1", "--alpha", "0.5", "--horizon", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  const auto [meta, table] = io::read_csv(is);
  EXPECT_EQ(meta.schema, "moments");
  ASSERT_EQ(table.rows.size(), 101u);
  EXPECT_EQ(std::get<std::int64_t>(table.rows[1][0]), 1);
  EXPECT_NEAR(std::get<double>(table.rows[1][2]), 1.0 / 72, 1e-17);
}

TEST(Cli, ValidationErrors) {
  auto r = cli({"simulate", "--alpha", "1.5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("alpha must lie in [0,1]"), std::string::npos);
  EXPECT_EQ(cli({"simulate", "--bogus", "1"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--n", "0"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--format", "xml"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"moments", "--out", "/nonexistent-dir/x.csv"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--horizon", "10", "--record-times", "5,20"}).code, 1);
  EXPECT_EQ(cli({"clt", "--n", "20"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--threads", "0"}).code, 1);
}

TEST(Cli, Help) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--alpha"), std::string::npos);
}

TEST(Cli, BudgetGuard) {
  const std::vector<std::string> base{"simulate", "--n", "10", "--replicas", "100", "--horizon", "10",
                                      "--budget", "1000"};
  EXPECT_EQ(cli(base).code, 1);
  auto over = base;
  over.push_back("--budget-override");
  EXPECT_EQ(cli(over).code, 0);
}

TEST_F(CliFiles, ReplayIsBitIdentical) {
  const std::vector<std::vector<std::string>> cmds{
      {"simulate", "--n", "6", "--alpha", "0.3", "--horizon", "80", "--record-every", "7"},
      {"simulate", "--n", "3", "--horizon", "40", "--replicas", "150", "--format", "jsonl"},
      {"moments", "--n", "4", "--horizon", "30", "--record-times", "1,2,30"},
      {"asymptotics", "--alphas", "0.1,0.5", "--t-hi", "100000"},
  };
  for (std::size_t c = 0; c < cmds.size(); ++c) {
    auto first = cmds[c];
    const auto a = path("a" + std::to_string(c)), b = path("b" + std::to_string(c));
    first.insert(first.end(), {"--out", a, "--threads", "1"});
    ASSERT_EQ(cli(first).code, 0);
    ASSERT_EQ(cli({"--config", a, "--out", b, "--threads", "8"}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b)) << c;
    EXPECT_FALSE(slurp(a).empty());
  }
}

TEST_F(CliFiles, FullVectorOutput) {
  const auto out = path("traj.csv");
  ASSERT_EQ(cli({"simulate", "--n", "4", "--horizon", "10", "--full", "--out", out}).code, 0);
  std::ifstream in(out + ".full.csv");
  const auto [meta, table] = io::read_csv(in);
  EXPECT_EQ(meta.schema, "trajectory_full");
  EXPECT_EQ(table.rows.size(), 11u * 4);
  EXPECT_EQ(cli({"simulate", "--n", "4", "--horizon", "10", "--full"}).code, 1);
}

TEST_F(CliFiles, CltSummary) {
  const auto out = path("clt.jsonl"), sum = path("clt.csv");
  ASSERT_EQ(cli({"clt", "--n", "500", "--replicas", "500", "--horizon", "3", "--out", out, "--summary-out", sum})
                .code,
            0);
  std::ifstream in(out);
  EXPECT_EQ(io::read_jsonl(in).second.rows.size(), 4u);
  std::ifstream s(sum);
  EXPECT_EQ(io::read_csv(s).second.rows.size(), 1u);
}

// defaults < config file < flags, for every combination on a few fields
TEST_F(CliFiles, PrecedenceMatrix) {
  struct Field {
    std::string flag, key;
    nlohmann::json dflt, in_file, on_cli;
    std::string cli_text;
  };
  const std::vector<Field> fields{
      {"--n", "n", 5, 7, 9, "9"},
      {"--alpha", "alpha", 0.5, 0.25, 0.75, "0.75"},
      {"--seed", "seed", 1, 11, 13, "13"},
      {"--horizon", "horizon", 100, 20, 30, "30"},
      {"--record-every", "record_every", 1, 4, 5, "5"},
  };
  for (int mask = 0; mask < (1 << (2 * fields.size())); mask += 1) {
    nlohmann::json file = nlohmann::json::object();
    std::vector<std::string> args{"simulate"};
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (mask >> (2 * k) & 1) file[fields[k].key] = fields[k].in_file;
      if (mask >> (2 * k + 1) & 1) args.insert(args.end(), {fields[k].flag, fields[k].cli_text});
    }
    const auto cfg_path = path("cfg.json");
    std::ofstream(cfg_path) << file.dump();
    args.insert(args.end(), {"--config", cfg_path});
    const auto r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto got = embedded_config(r.out);
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const bool in_file = mask >> (2 * k) & 1, on_cli = mask >> (2 * k + 1) & 1;
      const auto& expect = on_cli ? fields[k].on_cli : in_file ? fields[k].in_file : fields[k].dflt;
      EXPECT_EQ(got.at(fields[k].key), expect) << fields[k].key << " mask " << mask;
    }
  }
}

TEST_F(CliFiles, ConfigErrors) {
  const auto bad = path("bad.json");
  std::ofstream(bad) << R"({"n": 3, "colour": "red"})";
  EXPECT_EQ(cli({"simulate", "--config", bad}).code, 1);
  EXPECT_EQ(cli({"simulate", "--config", path("missing.json")}).code, 1);
}

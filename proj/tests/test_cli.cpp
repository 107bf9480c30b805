#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "momentum/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string output;  // stdout and stderr interleaved
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MOMENTUM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int st = pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("momentum_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthThenTestMomentum) {
  ASSERT_EQ(run("synth --beta 0 --seed 1 --out " + path("s")).status, 0);
  const auto r = run("test-momentum --input " + path("s/synth.csv") + " --out " + path("t"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto line = nlohmann::json::parse(r.output);
  EXPECT_TRUE(line.contains("p_value"));
  const auto doc = nlohmann::json::parse(momentum::io::read_file(path("t/test_momentum.json")));
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_TRUE(doc["chi_squared"].contains("p_value"));
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  const auto r = run("momentum --no-such-flag");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("--no-such-flag"), std::string::npos);
}

TEST_F(Cli, MissingInputIsUsageError) {
  const auto r = run("momentum --out " + path("o"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("--input"), std::string::npos);
}

TEST_F(Cli, DomainErrorPassesModuleMessage) {
  const auto r = run("ingest --input " + path("absent.csv"));
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.output.rfind("EmptyInput:", 0), 0u) << r.output;
}

TEST_F(Cli, ConfigPrecedence) {
  ASSERT_EQ(run("synth --out " + path("s")).status, 0);
  momentum::io::write_atomic(path("run.cfg"), "cap=5\nout=" + path("fromfile") + "\n");
  ASSERT_EQ(run("test-momentum --config " + path("run.cfg") + " --input " + path("s/synth.csv")).status, 0);
  auto doc = nlohmann::json::parse(momentum::io::read_file(path("fromfile/test_momentum.json")));
  EXPECT_EQ(doc["table"]["cap"], 5);
  ASSERT_EQ(run("test-momentum --config " + path("run.cfg") + " --cap 4 --input " + path("s/synth.csv")).status, 0);
  doc = nlohmann::json::parse(momentum::io::read_file(path("fromfile/test_momentum.json")));
  EXPECT_EQ(doc["table"]["cap"], 4);
}

TEST_F(Cli, UnknownConfigKeyRejected) {
  momentum::io::write_atomic(path("bad.cfg"), "cap=5\nbogus_key=1\n");
  const auto r = run("synth --config " + path("bad.cfg") + " --out " + path("o"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("bogus_key"), std::string::npos);
}

TEST_F(Cli, HelpDocumentsDefaults) {
  const auto r = run("--help");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.output.find("--target-changepoints"), std::string::npos);
  EXPECT_NE(r.output.find("[500]"), std::string::npos);
}

TEST_F(Cli, ReportIsReproducibleAndLeavesInputAlone) {
  ASSERT_EQ(run("synth --full --matches 2 --out " + path("s")).status, 0);
  const auto before = momentum::io::read_file(path("s/synth.csv"));
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(run("report --input " + path("s/synth.csv") + " --out " + path(d)).status, 0);
  }
  EXPECT_EQ(momentum::io::read_file(path("s/synth.csv")), before);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(path("a"))) {
    ++files;
    EXPECT_EQ(momentum::io::read_file(e.path()), momentum::io::read_file(path("b") / e.path().filename()))
        << e.path().filename();
  }
  EXPECT_EQ(files, 5u);
}

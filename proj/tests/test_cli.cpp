// artiscene - articulated 3D scene graphs from point trajectories
//
// End-to-end tests of the command line driver: exit codes, error reports and
// stage files.

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "artiscene/bundle.hpp"

#ifndef ARTISCENE_CLI
#error "ARTISCENE_CLI must name the driver executable"
#endif

namespace artiscene {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("artiscene_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  CliResult cli(const std::string& args) {
    const fs::path err = root_ / "stderr.txt";
    const std::string cmd = std::string(ARTISCENE_CLI) + " " + args + " > " +
                            (root_ / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = fs::exists(err) ? read_file(err) : "";
    return r;
  }

  std::string p(const std::string& rel) const { return (root_ / rel).string(); }

  fs::path root_;
};

TEST_F(Cli, StaticSceneSegmentsToNothing) {
  ASSERT_EQ(cli("--seed 1 --out " + p("b") + " simulate --preset static").code, 0);
  ASSERT_EQ(cli("--out " + p("s") + " segment --bundle " + p("b")).code, 0);
  EXPECT_TRUE(read_json(p("s/segments.json")).at("segments").empty());
}

TEST_F(Cli, TruncatedDepthExitsTwoWithShapeError) {
  ASSERT_EQ(cli("--out " + p("b") + " simulate --preset static").code, 0);
  const fs::path f = root_ / "b" / frame_name("depth", 0);
  std::string raw = read_file(f);
  raw.pop_back();
  write_file_atomic(f, raw);
  const CliResult r = cli("--out " + p("s") + " segment --bundle " + p("b"));
  EXPECT_EQ(r.code, 2);
  const Json j = Json::parse(r.err);
  EXPECT_EQ(j.at("error"), "shape");
}

TEST_F(Cli, UnknownConfigKeyExitsTwo) {
  write_file_atomic(root_ / "cfg.json", "{\"lamda\": 2.0}\n");
  ASSERT_EQ(cli("--out " + p("b") + " simulate --preset static").code, 0);
  const CliResult r = cli("--config " + p("cfg.json") + " --out " + p("s") + " segment --bundle " + p("b"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err).at("error"), "validation");
}

TEST_F(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(cli("segment").code, 2);
  EXPECT_EQ(cli("simulate --preset attic").code, 2);
  EXPECT_EQ(cli("--threads -1 simulate").code, 2);
}

TEST_F(Cli, AllSegmentsFailingExitsThree) {
  ASSERT_EQ(cli("--out " + p("b") + " simulate --preset static").code, 0);
  write_file_atomic(root_ / "segs.json", "{\"segments\": [[0, 20]]}\n");
  const CliResult r = cli("--out " + p("e") + " estimate --bundle " + p("b") + " --segments " + p("segs.json"));
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(Json::parse(r.err).at("error"), "empty-cluster");
  // The failure is still recorded on disk.
  EXPECT_FALSE(read_json(p("e/articulations.json")).at("failures").empty());
}

TEST_F(Cli, StagesEqualRun) {
  ASSERT_EQ(cli("--seed 7 --out " + p("b") + " simulate --preset drawer").code, 0);
  ASSERT_EQ(cli("--out " + p("run") + " run --bundle " + p("b")).code, 0);
  ASSERT_EQ(cli("--out " + p("st") + " segment --bundle " + p("b")).code, 0);
  ASSERT_EQ(cli("--out " + p("st") + " estimate --bundle " + p("b") + " --segments " + p("st/segments.json")).code, 0);
  ASSERT_EQ(cli("--out " + p("st") + " match --bundle " + p("b") + " --articulations " +
                p("st/articulations.json")).code, 0);
  ASSERT_EQ(cli("--out " + p("st") + " eval --graph " + p("st") + " --gt " + p("b/gt.json")).code, 0);
  for (const char* f : {"segments.json", "articulations.json", "graph.json", "report.json"}) {
    EXPECT_EQ(read_file(root_ / "run" / f), read_file(root_ / "st" / f)) << f;
  }
  const Json graph = read_json(p("run/graph.json"));
  ASSERT_EQ(graph.at("articulations").size(), 1u);
  EXPECT_EQ(graph.at("articulations")[0].at("kind"), "PRISMATIC");
  EXPECT_EQ(graph.at("matches").size(), 1u);
}

}  // namespace
}  // namespace artiscene

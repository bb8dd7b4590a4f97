#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "posekit_cli/cli.hpp"

namespace fs = std::filesystem;
using posekit::cli::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("posekit_cli") {}

  void SetUp() override {
    ASSERT_EQ(run({"synth", "--kind", "figure", "--frames", "4", "--jitter", "0.2", "--seed", "1", "-o", dir_ / "a.json"})
                  .code,
              0);
    ASSERT_EQ(run({"synth", "--kind", "figure", "--frames", "3", "--hands", "--seed", "2", "-o", dir_ / "b.json"}).code,
              0);
    ASSERT_EQ(run({"synth", "--kind", "pool", "--count", "6", "--seed", "3", "-o", dir_ / "pool.json"}).code, 0);
  }

  std::map<std::string, std::string> listing(const std::string& sub) const {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir_.path() / sub)) {
      files[e.path().filename().string()] = fixtures::slurp(e.path());
    }
    return files;
  }

  fixtures::TempDir dir_;
};

}  // namespace

TEST_F(CliTest, AugmentLambdaZeroCopiesInputs) {
  const Result r = run({"augment", dir_ / "a.json", dir_ / "b.json", "--pool", dir_ / "pool.json", "--lambda", "0",
                        "--trials", "2", "--out-dir", dir_ / "aug", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto files = listing("aug");
  EXPECT_EQ(files.size(), 8u);
  for (const char* stem : {"a", "b"}) {
    const std::string input = fixtures::slurp(dir_ / (std::string(stem) + ".json"));
    for (int k = 0; k < 2; ++k) {
      const std::string base = std::string(stem) + "_" + std::to_string(k);
      EXPECT_EQ(files.at(base + ".json"), input);
      EXPECT_EQ(nlohmann::json::parse(files.at(base + ".record.json"))["applied"], false);
    }
  }
}

TEST_F(CliTest, AugmentAndRenderIndependentOfJobs) {
  for (const char* jobs : {"1", "4"}) {
    const Result a = run({"augment", dir_ / "a.json", dir_ / "b.json", "--pool", dir_ / "pool.json", "--trials", "3",
                          "--lambda", "0.8", "--out-dir", dir_ / (std::string("aug") + jobs), "--jobs", jobs, "--seed",
                          "5"});
    ASSERT_EQ(a.code, 0) << a.err;
    const Result r = run({"render", dir_ / "a.json", "--out-dir", dir_ / (std::string("png") + jobs), "--jobs", jobs});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(listing("aug1"), listing("aug4"));
  EXPECT_EQ(listing("png1"), listing("png4"));
  EXPECT_EQ(listing("png1").size(), 4u);
  EXPECT_TRUE(listing("png1").count("frame_00003.ppm"));
}

TEST_F(CliTest, StatsJsonSumsToHundred) {
  const Result r = run({"stats", "--pool", dir_ / "pool.json", "--driving", dir_ / "a.json", "--trials", "20", "--json",
                        "-", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["trials"], 20);
  for (const auto& g : doc["groups"]) {
    double sum = 0.0;
    for (double p : g["pre_clamp"]["percent"]) sum += p;
    EXPECT_NEAR(sum, 100.0, 0.01) << g["name"];
  }
  const Result table = run({"stats", "--pool", dir_ / "pool.json", "--driving", dir_ / "a.json", "--seed", "4"});
  EXPECT_NE(table.out.find("Shoulder Length"), std::string::npos);
}

TEST_F(CliTest, IpiCheckPasses) {
  const Result r = run({"ipi-check", "--seed", "1", "--set", "check.entries=4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["passed"], true);
  EXPECT_LE(doc["max_rel_error"].get<double>(), 1e-4);
}

TEST_F(CliTest, IpiCheckFailureExitsThree) {
  const Result r = run({"ipi-check", "--seed", "1", "--set", "check.entries=2", "--set", "check.tolerance=1e-300"});
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, StochasticCommandsNeedSeed) {
  const std::vector<std::vector<std::string>> cmds{
      {"rescale", dir_ / "a.json", "--sample"},
      {"augment", dir_ / "a.json", "--pool", dir_ / "pool.json", "--out-dir", dir_ / "x"},
      {"stats", "--pool", dir_ / "pool.json", "--driving", dir_ / "a.json"},
      {"ipi-check"},
      {"train-sim", "--steps", "1"},
      {"synth"},
  };
  for (const auto& c : cmds) {
    const Result r = run(c);
    EXPECT_EQ(r.code, 1) << c[0];
    EXPECT_NE(r.err.find("seed"), std::string::npos) << c[0] << ": " << r.err;
  }
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"render", dir_ / "a.json", "--out-dir", dir_ / "r", "--bogus"}).code, 1);
  EXPECT_EQ(run({"render", dir_ / "a.json", "--out-dir", dir_ / "r", "--set", "render.colour=3"}).code, 1);
  EXPECT_EQ(run({"render", dir_ / "a.json", "--out-dir", dir_ / "r", "--set", "nonsense"}).code, 1);
  EXPECT_EQ(run({"convert", dir_ / "missing.json"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  std::ofstream(dir_ / "broken.json") << "{\"version\": 1, \"width\": ";
  EXPECT_EQ(run({"render", dir_ / "broken.json", "--out-dir", dir_ / "r"}).code, 2);
  std::ofstream(dir_ / "v2.json") << "{\"version\": 2, \"width\": 4, \"height\": 4, \"fps\": 1, \"frames\": []}";
  EXPECT_EQ(run({"render", dir_ / "v2.json", "--out-dir", dir_ / "r"}).code, 2);
}

TEST_F(CliTest, ConvertAndRealign) {
  const std::string coco = std::string(POSEKIT_TEST_DATA_DIR) + "/coco_wholebody_frame.json";
  const Result c = run({"convert", coco});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(run({"convert", coco}).out, c.out);
  const Result r = run({"realign", dir_ / "a.json", "--anchor", dir_ / "b.json", "--record", dir_ / "rec.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(fixtures::slurp(dir_ / "rec.json"))["applied"], true);
}

TEST_F(CliTest, TrainSimDeterministicAndResumable) {
  const std::vector<std::string> base{"train-sim", "--steps", "3", "--seed", "8", "--set", "sim.pool_size=3"};
  const Result a = run(base);
  const Result b = run(base);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto doc = nlohmann::json::parse(a.out);
  EXPECT_EQ(doc["steps"], 3);

  std::vector<std::string> first{"train-sim", "--steps", "2", "--seed", "8", "--checkpoint", dir_ / "c.pkpt"};
  ASSERT_EQ(run(first).code, 0);
  std::vector<std::string> second{"train-sim", "--steps", "2", "--seed", "8", "--resume", dir_ / "c.pkpt",
                                  "--checkpoint", dir_ / "d.pkpt"};
  ASSERT_EQ(run(second).code, 0);
  std::vector<std::string> whole{"train-sim", "--steps", "4", "--seed", "8", "--checkpoint", dir_ / "e.pkpt"};
  ASSERT_EQ(run(whole).code, 0);
  EXPECT_EQ(fixtures::slurp(dir_ / "d.pkpt"), fixtures::slurp(dir_ / "e.pkpt"));
  std::ofstream(dir_ / "junk.pkpt") << "junk";
  EXPECT_EQ(run({"train-sim", "--steps", "1", "--seed", "8", "--resume", dir_ / "junk.pkpt"}).code, 2);
}

TEST(CliBinary, HelpExitsZero) {
  const std::string cmd = std::string("\"") + POSEKIT_CLI_PATH + "\" --help > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

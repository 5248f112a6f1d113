#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "support.hpp"

namespace csts {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string output;
};

Run cli(const std::string& args, const std::string& dir) {
  const std::string log = dir + "/cli.log";
  const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>&1", CSTS_CLI_PATH, args, log);
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, {std::istreambuf_iterator<char>(in), {}}};
}

std::string small_config(const std::string& dir) {
  std::ifstream in(CSTS_DEFAULT_CONFIG);
  auto j = nlohmann::json::parse(in);
  j["duration_hours"] = 48;
  j["eval"]["bootstrap"]["B"] = 100;
  const std::string path = dir + "/small.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

std::map<std::string, std::string> tree(const std::string& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return out;
}

TEST(Cli, ReproIsByteIdenticalAcrossRuns) {
  const auto dir = testing::scratch_dir("cli-repro");
  const auto cfg = small_config(dir);
  const auto r1 = cli(fmt::format("repro --config \"{}\" --out \"{}/one\"", cfg, dir), dir);
  ASSERT_EQ(r1.code, 0) << r1.output;
  const auto r2 = cli(fmt::format("repro --config \"{}\" --out \"{}/two\"", cfg, dir), dir);
  ASSERT_EQ(r2.code, 0) << r2.output;
  const auto a = tree(dir + "/one"), b = tree(dir + "/two");
  ASSERT_FALSE(a.empty());
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [path, bytes] : a) {
    ASSERT_TRUE(b.count(path)) << path;
    EXPECT_TRUE(b.at(path) == bytes) << path;
  }
  EXPECT_TRUE(a.count("tables/manifest.json"));
}

TEST(Cli, SeedChangesOutput) {
  const auto dir = testing::scratch_dir("cli-seed");
  const auto cfg = small_config(dir);
  ASSERT_EQ(cli(fmt::format("synth --config \"{}\" --out \"{}/a\"", cfg, dir), dir).code, 0);
  ASSERT_EQ(cli(fmt::format("synth --config \"{}\" --out \"{}/b\" --seed 7", cfg, dir), dir).code, 0);
  EXPECT_NE(tree(dir + "/a").at("raw/env_a.csv"), tree(dir + "/b").at("raw/env_a.csv"));
}

TEST(Cli, EvalBeforeFeaturesNamesMissingFile) {
  const auto dir = testing::scratch_dir("cli-missing");
  const auto cfg = small_config(dir);
  const auto r = cli(fmt::format("eval --config \"{}\" --out \"{}/out\"", cfg, dir), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("MissingArtifact"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("features/"), std::string::npos) << r.output;
}

TEST(Cli, DivergentProducerFailsGate) {
  const auto dir = testing::scratch_dir("cli-viability");
  const auto cfg = small_config(dir);
  ASSERT_EQ(cli(fmt::format("synth --config \"{}\" --out \"{}/out\"", cfg, dir), dir).code, 0);
  const auto raw = dir + "/out/raw/";
  const auto r = cli(fmt::format("viability --config \"{}\" --train \"{}producer_train.csv\" "
                                 "--test \"{}producer_divergent.csv\"",
                                 cfg, raw, raw),
                     dir);
  EXPECT_EQ(r.code, 3) << r.output;

  const auto ok = cli(fmt::format("viability --config \"{}\" --train \"{}producer_control_train.csv\" "
                                  "--test \"{}producer_control_test.csv\"",
                                  cfg, raw, raw),
                      dir);
  EXPECT_EQ(ok.code, 0) << ok.output;
}

TEST(Cli, UnknownLevelIsUsageOrDataError) {
  const auto dir = testing::scratch_dir("cli-level");
  const auto r = cli(fmt::format("perturb --level P9 --in \"{}/x.csv\" --out \"{}/y.csv\"", dir, dir), dir);
  EXPECT_NE(r.code, 0);
}

}  // namespace
}  // namespace csts

// Copyright 2026 The Credence Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exit codes of the command-line tool, run as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kExample = fs::path(CREDENCE_SOURCE_DIR) / "data" / "example";

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + CREDENCE_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("credence_cli_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // A small configuration over the shipped example data with absolute paths.
  nlohmann::json base_config() const {
    auto j = nlohmann::json::parse(R"({
      "version": 1, "seed": 3, "runs": 1,
      "settings": ["zero-shot", "demo-only"],
      "axes": ["gender"],
      "endpoints": [{"name": "m", "model": "m", "mock": "demographics_blind"}],
      "retries": {"max_retries": 0, "backoff_ms": 0}
    })");
    j["datasets"] = {{{"kind", "pandora"}, {"path", (kExample / "pandora.csv").string()}}};
    j["survey"] = {{"questions", (kExample.parent_path() / "wvs_taxonomy.csv").string()},
                   {"distributions", {(kExample / "distributions.ndjson").string()}}};
    j["output_dir"] = (dir_ / "out").string();
    j["cache_dir"] = (dir_ / "cache").string();
    return j;
  }

  std::string write_config(const nlohmann::json& j) const {
    const fs::path p = dir_ / "config.json";
    std::ofstream(p) << j.dump(2);
    return "--config \"" + p.string() + "\"";
  }

  fs::path dir_;
};

TEST_F(CliTest, ValidateShippedExample) {
  EXPECT_EQ(run_cli("validate --config \"" + (kExample / "config.json").string() + "\""), 0);
}

TEST_F(CliTest, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("validate"), 2);
  EXPECT_EQ(run_cli("validate --config \"" + (dir_ / "absent.json").string() + "\""), 2);
  auto j = base_config();
  j.erase("seed");
  EXPECT_EQ(run_cli("validate " + write_config(j)), 2);
}

TEST_F(CliTest, SweepSucceedsAndRefusesStaleCacheWithoutResume) {
  const std::string cfg = write_config(base_config());
  ASSERT_EQ(run_cli("sweep " + cfg), 0);
  EXPECT_TRUE(fs::is_regular_file(dir_ / "out" / "summary.md"));
  EXPECT_EQ(run_cli("sweep " + cfg), 2);
  EXPECT_EQ(run_cli("sweep --resume " + cfg), 0);
}

TEST_F(CliTest, OutAndMockFlagsOverrideTheConfig) {
  auto j = base_config();
  j["endpoints"][0].erase("mock");
  j["endpoints"][0]["base_url"] = "http://127.0.0.1:9/v1";
  const fs::path out = dir_ / "elsewhere";
  EXPECT_EQ(run_cli("sweep --mock --seed 9 --out \"" + out.string() + "\" " + write_config(j)), 0);
  EXPECT_TRUE(fs::is_regular_file(out / "summary.md"));
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, UnreachableEndpointExitsThree) {
  auto j = base_config();
  j["settings"] = {"zero-shot"};
  j["endpoints"][0].erase("mock");
  j["endpoints"][0]["base_url"] = "http://127.0.0.1:9/v1";
  j["endpoints"][0]["timeout_s"] = 2.0;
  EXPECT_EQ(run_cli("sweep " + write_config(j)), 3);
  EXPECT_TRUE(fs::is_regular_file(dir_ / "out" / "failures.csv"));
}

TEST_F(CliTest, MalformedDatasetExitsFour) {
  const fs::path bad = dir_ / "bad.csv";
  std::ofstream(bad) << "pid,claim_id\np1,c1\n";
  auto j = base_config();
  j["datasets"][0]["path"] = bad.string();
  EXPECT_EQ(run_cli("validate " + write_config(j)), 4);
}

}  // namespace

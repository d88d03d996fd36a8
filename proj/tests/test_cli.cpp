// Copyright 2026 The CFA Authors.
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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfa/cli.hpp"
#include "cfa/errors.hpp"
#include "cfa/tensor_io.hpp"
#include "doctest.h"
#include "support/temp_dir.hpp"

using namespace cfa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small world: 10 classes, 6 base / 4 novel, 8 samples each.
fs::path make_world(const fs::path& dir) {
  const auto r = invoke({"gen-synthetic", "--out", dir.string(), "--classes", "10",
                         "--samples", "8", "--channels", "8", "--groups", "2",
                         "--height", "2", "--width", "2", "--vocab", "4",
                         "--base_classes", "6"});
  REQUIRE(r.code == 0);
  return dir / "manifest.csv";
}

}  // namespace

TEST_CASE("settings files") {
  const std::vector<std::string> keys = {"N", "lr"};
  const auto s = cli::parse_settings("# comment\n\n N = 4 \nlr=0.01\n", "f", keys);
  CHECK(s.at("N") == "4");
  CHECK(s.at("lr") == "0.01");
  CHECK(cli::format_settings(s) == "N=4\nlr=0.01\n");
  CHECK_THROWS_AS(cli::parse_settings("bogus=1\n", "f", keys), ConfigError);
  CHECK_THROWS_AS(cli::parse_settings("N 4\n", "f", keys), ConfigError);
  CHECK_THROWS_WITH_AS(cli::parse_settings("\nK=3\n", "run.cfg", keys),
                       doctest::Contains("run.cfg:2"), ConfigError);
}

TEST_CASE("gradcheck subcommand") {
  const auto r = invoke({"gradcheck", "--seed", "7"});
  CHECK(r.code == 0);
  CHECK(r.out.find("max relative gradient error") != std::string::npos);
}

TEST_CASE("usage errors map to the config exit code") {
  CHECK(invoke({}).code == cli::kConfigError);
  CHECK(invoke({"fly"}).code == cli::kConfigError);
  CHECK(invoke({"gradcheck", "--nope", "1"}).code == cli::kConfigError);
  CHECK(invoke({"gradcheck", "--seed", "x"}).code == cli::kConfigError);
  CHECK(invoke({"gradcheck", "--help"}).code == cli::kOk);
}

TEST_CASE("missing manifest leaves no outputs") {
  testing::TempDir dir;
  const auto out = dir.path() / "run";
  const auto r = invoke({"train", "--manifest", (dir.path() / "absent.csv").string(),
                         "--out", out.string()});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("config error") == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("train, eval and baseline-eval end to end") {
  testing::TempDir dir;
  const auto manifest = make_world(dir.path() / "world");
  const auto run_dir = dir.path() / "run";

  std::ofstream(dir.path() / "train.cfg") << "N=2\nK=4\nalpha=2\niters=3\nbatch=2\nqueries=3\n";
  auto r = invoke({"train", "--config", (dir.path() / "train.cfg").string(),
                   "--manifest", manifest.string(), "--out", run_dir.string(),
                   "--iters", "4", "--lr", "0.01"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto config = slurp(run_dir / "config.txt");
  CHECK(config.find("iters=4\n") != std::string::npos);  // flag beats file
  CHECK(config.find("K=4\n") != std::string::npos);
  CHECK(config.find("lr=0.01\n") != std::string::npos);
  const auto params = read_tensor(run_dir / "params.cfaf");
  CHECK(params.shape() == std::vector<std::size_t>{2, 4, 4});
  const auto curve = slurp(run_dir / "loss_curve.csv");
  CHECK(curve.rfind("iteration,loss,val_accuracy\n", 0) == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 5);

  r = invoke({"eval", "--manifest", manifest.string(), "--params",
              (run_dir / "params.cfaf").string(), "--alpha", "2", "--split", "novel",
              "--episodes", "20", "--queries", "3", "--way", "4", "--out", (dir.path() / "eval").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = slurp(dir.path() / "eval" / "eval_report.csv");
  CHECK(report.rfind("episodes,mean,ci95\n20,", 0) == 0);

  r = invoke({"baseline-eval", "--manifest", manifest.string(), "--episodes", "20",
              "--queries", "3", "--way", "4", "--out", (dir.path() / "base").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir.path() / "base" / "baseline_report.csv"));

  // Same resolution twice gives the same effective config.
  invoke({"train", "--config", (dir.path() / "train.cfg").string(), "--manifest",
          manifest.string(), "--out", (dir.path() / "run2").string(), "--iters", "4",
          "--lr", "0.01"});
  auto second = slurp(dir.path() / "run2" / "config.txt");
  second.replace(second.find("run2"), 4, "run");
  CHECK(second == config);
  CHECK(slurp(dir.path() / "run2" / "loss_curve.csv") == curve);
}

TEST_CASE("data problems map to the data exit code") {
  testing::TempDir dir;
  const auto manifest = make_world(dir.path() / "world");
  // 4 novel classes cannot host a 5-way episode.
  auto r = invoke({"baseline-eval", "--manifest", manifest.string(), "--out",
                   (dir.path() / "base").string()});
  CHECK(r.code == cli::kDataError);
  CHECK_FALSE(fs::exists(dir.path() / "base"));

  std::ofstream(dir.path() / "bad.csv") << "nothing.cfaf,0,base\n";
  r = invoke({"baseline-eval", "--manifest", (dir.path() / "bad.csv").string(),
              "--out", (dir.path() / "x").string()});
  CHECK(r.code == cli::kDataError);
}

TEST_CASE("unknown config keys are rejected") {
  testing::TempDir dir;
  std::ofstream(dir.path() / "c.cfg") << "clutter=0.2\n";
  const auto r = invoke({"train", "--config", (dir.path() / "c.cfg").string()});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("unknown key 'clutter'") != std::string::npos);
}

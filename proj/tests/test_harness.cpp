// Copyright 2026 The doa-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doalab/errors.hpp"
#include "doalab/harness/config.hpp"
#include "doalab/harness/csv.hpp"
#include "doalab/harness/experiments.hpp"

using namespace doalab;
using namespace doalab::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("doalab_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Config small(Experiment e, const fs::path& out) {
  Config c = Config::defaults(e);
  c.set("run.out", out.string());
  c.set("run.trials", "200");
  return c;
}

}  // namespace

TEST_CASE("config defaults, overrides and unknown keys") {
  const auto roc = Config::defaults(Experiment::kRoc);
  CHECK(roc.integer("array.antennas") == 64);
  CHECK(roc.integer("scenario.snapshots") == 200);
  CHECK(roc.reals("scenario.snr_db") == std::vector<double>{-20.0});
  CHECK(Config::defaults(Experiment::kLossBits).integer("array.antennas") == 32);

  const auto c = Config::parse("experiment = rmse-eta\n[run]\nseed = 9\n[eta]\ngrid = 0.5, 1\n", Experiment::kRmseEta);
  CHECK(c.unsigned64("run.seed") == 9);
  CHECK(c.reals("eta.grid") == std::vector<double>{0.5, 1.0});
  CHECK_THROWS_AS(Config::parse("[run]\nseeed = 1\n", Experiment::kRoc), ConfigError);
  CHECK_THROWS_AS(Config::parse("[bogus]\nx = 1\n", Experiment::kRoc), ConfigError);
  CHECK_THROWS_AS(Config::parse("experiment = roc\n", Experiment::kLossBits), ConfigError);
  CHECK_THROWS_AS(Config::parse("[run]\ntrials = many\n", Experiment::kRoc).integer("run.trials"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[eta]\ngrid = 0.5,,1\n", Experiment::kRmseEta).reals("eta.grid"), ConfigError);
  CHECK_THROWS_AS(experiment_from_string("rmse"), ConfigError);
}

TEST_CASE("digest ignores where and how fast, not what") {
  Config a = Config::defaults(Experiment::kRmseSnr);
  Config b = a;
  b.set("run.workers", "8");
  b.set("run.out", "/elsewhere");
  CHECK(a.digest() == b.digest());
  b.set("run.seed", "2");
  CHECK(a.digest() != b.digest());
  CHECK(a.digest_hex().size() == 16);
}

TEST_CASE("numbers in CSV read back exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 0.0})
    CHECK(std::stod(num(v)) == v);
  CHECK(num(std::numeric_limits<double>::infinity()) == "inf");
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "x.csv", {"a", "b"});
    w.row({"1", "2"});
    CHECK_THROWS_AS(w.row({"1"}), ContractError);
  }
  const auto rows = read_csv(dir / "x.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == "2");
}

TEST_CASE("loss-bits output is reproducible and worker independent") {
  const auto dir = scratch("loss");
  Config c = small(Experiment::kLossBits, dir / "one");
  c.set("quant.bits", "1,3");
  c.set("scenario.snr_db", "0");
  const auto r = run_loss_bits(c);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[2].bits == 0);
  CHECK(r.rows[2].loss_db == 0.0);
  CHECK(r.rows[0].loss_db > r.rows[1].loss_db);
  c.set("run.out", (dir / "two").string());
  c.set("run.workers", "3");
  run_loss_bits(c);
  CHECK(slurp(dir / "one" / "loss_bits.csv") == slurp(dir / "two" / "loss_bits.csv"));
}

TEST_CASE("rmse experiments carry provenance columns") {
  const auto dir = scratch("rmse");
  Config c = small(Experiment::kRmseSnr, dir);
  c.set("scenario.snr_db", "10");
  const auto r = run_rmse_snr(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].classic.snapshots == 5.0);
  CHECK(r.rows[0].fhad.snapshots == 2.0);
  CHECK(r.rows[0].tlhad.snapshots == 1.0);
  const auto rows = read_csv(dir / "rmse_snr.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][rows[0].size() - 3] == "trials");
  CHECK(rows[0][rows[0].size() - 2] == "seed");
  CHECK(rows[1][rows[1].size() - 3] == "200");
  CHECK(rows[1].back() == c.digest_hex());

  Config e = small(Experiment::kRmseEta, dir);
  e.set("scenario.snr_db", "10");
  e.set("eta.grid", "0.25,1");
  const auto re = run_rmse_eta(e);
  REQUIRE(re.rows.size() == 2);
  CHECK(re.rows[1].k_sub == 0);
  CHECK(re.rows[1].ratio < 1.5);
}

TEST_CASE("train-mlnn then roc on a small array") {
  const auto dir = scratch("mlnn");
  Config t = Config::defaults(Experiment::kTrainMlnn);
  t.set("run.out", dir.string());
  t.set("array.antennas", "8");
  t.set("scenario.snapshots", "40");
  t.set("scenario.snr_db", "-5");
  t.set("mlnn.shapes", "2;3");
  t.set("mlnn.activations", "sigmoid,tanh");
  t.set("mlnn.selection_examples", "200");
  t.set("mlnn.validation_examples", "200");
  t.set("mlnn.epochs", "5");
  t.set("detect.fap", "0.1");
  t.set("detect.calibration_trials", "1000");
  const auto trained = run_train_mlnn(t);
  CHECK(fs::exists(trained.model_file));
  CHECK(trained.selection.dataset_ratio >= 5.0);
  CHECK(trained.selection.dataset_ratio <= 10.0);
  const auto first = slurp(trained.model_file);
  run_train_mlnn(t);
  CHECK(slurp(trained.model_file) == first);

  Config r = Config::defaults(Experiment::kRoc);
  r.set("run.out", dir.string());
  r.set("run.trials", "1000");
  r.set("array.antennas", "8");
  r.set("scenario.snapshots", "40");
  r.set("scenario.snr_db", "-5");
  r.set("detect.fap", "0.1");
  r.set("detect.calibration_trials", "1000");
  const auto roc = run_roc(r);
  CHECK(roc.detectors.size() == 3);
  const auto rows = read_csv(dir / "roc.csv");
  CHECK(slurp(dir / "roc.csv").rfind("fap,pd,detector,snr_db,n,l,trials,seed\n", 0) == 0);
  CHECK(rows[1][0] == "0");
  CHECK(rows[1][1] == "0");
  for (const auto& c : roc.curves) {
    CHECK(c.front().fap == 0.0);
    CHECK(c.back().pd == 1.0);
  }
  const auto one = slurp(dir / "roc.csv");
  r.set("run.workers", "4");
  run_roc(r);
  CHECK(slurp(dir / "roc.csv") == one);

  r.set("run.model", (dir / "missing.json").string());
  try {
    run_roc(r);
    FAIL("expected a missing-model error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train-mlnn") != std::string::npos);
  }
}

TEST_CASE("command line exit codes") {
  const char* cli = std::getenv("DOALAB_CLI");
  if (!cli) {
    MESSAGE("DOALAB_CLI not set; skipping");
    return;
  }
  const auto dir = scratch("cli");
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " >" + (dir / "out.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  std::ofstream(dir / "ok.ini") << "[run]\ntrials = 100\n[quant]\nbits = 2\n[scenario]\nsnr_db = 0\n";
  std::ofstream(dir / "bad.ini") << "[run]\ntrails = 100\n";
  CHECK(run("loss-bits --config " + (dir / "ok.ini").string() + " --out " + (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "loss_bits.csv"));
  CHECK(run("loss-bits --config " + (dir / "bad.ini").string()) == 2);
  CHECK(run("warp-drive --config " + (dir / "ok.ini").string()) == 2);
  CHECK(run("loss-bits") == 2);
  CHECK(run("roc --config " + (dir / "ok.ini").string() + " --model " + (dir / "none.json").string()) == 2);
  CHECK(slurp(dir / "out.txt").find("train-mlnn") != std::string::npos);
}

TEST_CASE("shipped configs spell out the defaults") {
  const char* dir = std::getenv("DOALAB_CONFIGS");
  if (!dir) {
    MESSAGE("DOALAB_CONFIGS not set; skipping");
    return;
  }
  for (Experiment e : {Experiment::kRoc, Experiment::kRmseSnr, Experiment::kRmseEta, Experiment::kLossBits,
                       Experiment::kTrainMlnn}) {
    const auto path = fs::path(dir) / (std::string(to_string(e)) + ".ini");
    INFO(path.string());
    REQUIRE(fs::exists(path));
    const auto c = Config::load(path, e);
    CHECK(c.canonical() == Config::defaults(e).canonical());
    CHECK(c.text("mlnn.shapes") == "4;8;16;8x4");
  }
}

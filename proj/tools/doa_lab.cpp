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

// doa-lab <experiment> --config <file> [--seed S] [--out DIR] [--workers W] [--model FILE]
//
// exit: 0 ok, 2 bad configuration, 3 numerical failure, 1 anything else

#include <cstdlib>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "doalab/errors.hpp"
#include "doalab/harness/config.hpp"
#include "doalab/harness/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace doalab;
  CLI::App app{"Monte Carlo experiments for hybrid-array DOA estimation and detection", "doa-lab"};
  std::string experiment, config_file, out_dir, model_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  app.add_option("experiment", experiment, "roc | rmse-snr | rmse-eta | loss-bits | train-mlnn")->required();
  app.add_option("--config", config_file, "INI file; missing keys take their defaults")->required();
  app.add_option("--seed", seed, "overrides run.seed");
  app.add_option("--out", out_dir, "overrides run.out");
  app.add_option("--workers", workers, "overrides run.workers");
  app.add_option("--model", model_file, "MLNN model file (read by roc, written by train-mlnn)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const auto exp = harness::experiment_from_string(experiment);
    auto cfg = harness::Config::load(config_file, exp);
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    if (workers) cfg.set("run.workers", std::to_string(*workers));
    if (!out_dir.empty()) cfg.set("run.out", out_dir);
    if (!model_file.empty()) cfg.set("run.model", model_file);
    for (const auto& f : harness::run_experiment(cfg)) fmt::print("wrote {}\n", f.string());
    return 0;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "doa-lab: config error: {}\n", e.what());
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    fmt::print(stderr, "doa-lab: numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "doa-lab: {}\n", e.what());
    return 1;
  }
}

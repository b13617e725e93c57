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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "doalab/detect.hpp"
#include "doalab/harness/config.hpp"
#include "doalab/mlnn.hpp"

namespace doalab::harness {

// Where the experiment writes; run.out, created on demand.
std::filesystem::path output_dir(const Config& cfg);
// run.model if set, else <out>/mlnn_model.json.
std::filesystem::path model_path(const Config& cfg);

// ---- roc -------------------------------------------------------------------

struct OperatingPoint {
  std::string detector;
  double target_fap = 0.0;
  double threshold = 0.0;
  double pd = 0.0;             // on the H1 scores of this run
  double empirical_fap = 0.0;  // on the H0 scores of this run (fresh data)
};

struct RocResult {
  std::vector<std::string> detectors;
  std::vector<std::vector<double>> h0;  // [detector][trial]
  std::vector<std::vector<double>> h1;
  std::vector<std::vector<RocPoint>> curves;
  std::vector<double> auc;
  std::vector<OperatingPoint> operating;
  int trials = 0;
  int calibration_trials = 0;
  std::vector<std::filesystem::path> files;
};

// Detectors are glrt, r-maxev-minev and mlnn, scored on identical realizations.
RocResult run_roc(const Config& cfg);

// ---- rmse-snr --------------------------------------------------------------

struct MethodStats {
  double rmse_deg = 0.0;
  double rmse_se_deg = 0.0;
  double resolved = 0.0;      // fraction within half an ambiguity period
  double snapshots = 0.0;     // mean snapshots consumed
  int failures = 0;
};

struct RmseSnrRow {
  double snr_db = 0.0;
  MethodStats classic, fhad, tlhad;
  double paired_mse_diff_deg2 = 0.0;  // mean(e_tlhad^2 - e_classic^2)
  double paired_mse_diff_se = 0.0;
  double crlb_had_sqrt_deg = 0.0;         // matched steering, T = 1
  double crlb_had_broadside_sqrt_deg = 0.0;
  double crlb_tlhad_sqrt_deg = 0.0;       // broadside steering, as operated
  double crlb_tlhad_matched_sqrt_deg = 0.0;
};

struct RmseSnrResult {
  std::vector<RmseSnrRow> rows;
  bool gain_null = false;
  std::vector<std::filesystem::path> files;
};

RmseSnrResult run_rmse_snr(const Config& cfg);

// ---- rmse-eta --------------------------------------------------------------

struct RmseEtaRow {
  double eta_requested = 0.0;
  double eta = 0.0;
  int n_fd = 0;
  int k_sub = 0;
  bool rounded = false;
  double snr_db = 0.0;
  MethodStats tlhad;
  double crlb_sqrt_deg = 0.0;
  double crlb_matched_sqrt_deg = 0.0;
  double ratio = 0.0;  // rmse / sqrt(crlb)
};

struct RmseEtaResult {
  std::vector<RmseEtaRow> rows;
  std::vector<std::filesystem::path> files;
};

RmseEtaResult run_rmse_eta(const Config& cfg);

// ---- loss-bits -------------------------------------------------------------

struct LossBitsRow {
  int bits = 0;  // 0 marks the unquantized sentinel
  double snr_db = 0.0;
  double rho = 0.0;
  double loss_db = 0.0;
  double empirical_loss_db = 0.0;
  double empirical_se_db = 0.0;
  double rmse_quantized_deg = 0.0;
  double rmse_ideal_deg = 0.0;
  int failures = 0;
};

struct LossBitsResult {
  std::vector<LossBitsRow> rows;
  std::vector<std::filesystem::path> files;
};

LossBitsResult run_loss_bits(const Config& cfg);

// ---- train-mlnn ------------------------------------------------------------

struct TrainMlnnResult {
  mlnn::SelectionReport selection;
  mlnn::MlnnModel model;
  std::filesystem::path model_file;
  std::vector<std::filesystem::path> files;
};

mlnn::DatasetSpec dataset_spec(const Config& cfg);
TrainMlnnResult run_train_mlnn(const Config& cfg);

// Runs whichever experiment cfg was built for; returns the files written.
std::vector<std::filesystem::path> run_experiment(const Config& cfg);

}  // namespace doalab::harness

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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "doalab/array_model.hpp"
#include "doalab/spectral.hpp"

namespace doalab {

struct Statistic {
  double value = 0.0;
  bool degenerate = false;  // covariance rank-deficient or zero
};

// R-MaxEV-MinEV: lambda_1 / lambda_P of descending eigenvalues.
Statistic maxmin_statistic(std::span<const double> eigs);

enum class GlrtForm {
  kSphericity,  // arithmetic over geometric mean of the eigenvalues (default)
  kRankOne,     // lambda_1 over the mean eigenvalue
};

Statistic glrt_statistic(std::span<const double> eigs, GlrtForm form = GlrtForm::kSphericity);

enum class Hypothesis { kNoise, kSignal };

struct DetectionResult {
  double statistic = 0.0;
  double threshold = 0.0;
  Hypothesis decision = Hypothesis::kNoise;
  std::string detector;
};

DetectionResult decide(double statistic, double threshold, std::string detector);

using EigenStatisticFn = std::function<double(std::span<const double> eigs)>;

// Empirical (1 - fap) quantile: the smallest observed value such that at most
// floor(fap * n) of the samples exceed it.
double upper_quantile(std::vector<double> samples, double fap);

// Monte Carlo calibration of the threshold under noise-only data. Trial i uses
// stream (seed, i, calibration), so the result is reproducible and can be
// split across workers.
double calibrate_threshold(const EigenStatisticFn& statistic, const ArrayConfig& cfg,
                           double noise_power, int n_snapshots, double target_fap, int n_trials,
                           std::uint64_t seed, int workers = 1);

struct RocPoint {
  double fap = 0.0;
  double pd = 0.0;
};

// Pooled-score threshold sweep: one step per distinct score, from (0,0) to (1,1).
// Higher scores mean "signal".
std::vector<RocPoint> roc_from_scores(std::span<const double> h0_scores,
                                      std::span<const double> h1_scores);

// Probability that a random H1 score exceeds a random H0 score (ties count 1/2).
double roc_auc(std::span<const double> h0_scores, std::span<const double> h1_scores);

// Fraction of H1 scores strictly above the threshold.
double detection_rate(std::span<const double> h1_scores, double threshold);

using ScoreFn = std::function<double(const CovarianceEstimate&)>;

struct RocRun {
  std::vector<double> h0_scores;
  std::vector<double> h1_scores;
  std::vector<RocPoint> curve;
};

// Scores n_trials noise-only and n_trials signal batches of L = scenario_h1.n_snapshots.
RocRun roc_curve(const ScoreFn& score, const EmitterScenario& scenario_h1, const ArrayConfig& cfg,
                 int n_trials, std::uint64_t seed, int workers = 1);

}  // namespace doalab

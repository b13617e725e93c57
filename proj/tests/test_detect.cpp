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

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

#include "doalab/detect.hpp"
#include "doalab/errors.hpp"

using namespace doalab;

TEST_CASE("eigenvalue statistics") {
  const std::vector<double> eigs{4.0, 2.0, 1.0, 1.0};
  CHECK(maxmin_statistic(eigs).value == 4.0);
  CHECK(glrt_statistic(eigs, GlrtForm::kRankOne).value == doctest::Approx(4.0 / 2.0));
  // AM / GM = 2 / 8^(1/4)
  CHECK(glrt_statistic(eigs).value == doctest::Approx(2.0 / std::pow(8.0, 0.25)).epsilon(1e-14));
  const std::vector<double> flat(5, 3.0);
  CHECK(glrt_statistic(flat).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(maxmin_statistic(flat).value == 1.0);

  const std::vector<double> rank_def{2.0, 0.0};
  CHECK(maxmin_statistic(rank_def).degenerate);
  CHECK(std::isinf(maxmin_statistic(rank_def).value));
  CHECK(glrt_statistic(rank_def).degenerate);
  CHECK_FALSE(glrt_statistic(rank_def, GlrtForm::kRankOne).degenerate);
  CHECK_THROWS_AS(maxmin_statistic(std::vector<double>{1.0}), ContractError);
}

TEST_CASE("upper quantile leaves at most fap of the sample above it") {
  std::vector<double> s(1000);
  std::iota(s.begin(), s.end(), 1.0);
  std::shuffle(s.begin(), s.end(), std::mt19937(1));
  const double tau = upper_quantile(s, 0.1);
  CHECK(tau == 900.0);
  CHECK(detection_rate(s, tau) == doctest::Approx(0.1));
  CHECK(upper_quantile(s, 0.01) == 990.0);
  CHECK_THROWS_AS(upper_quantile(s, 0.0), ContractError);
  CHECK_THROWS_AS(upper_quantile({}, 0.1), ContractError);
  CHECK(decide(5.0, 4.0, "x").decision == Hypothesis::kSignal);
  CHECK(decide(4.0, 4.0, "x").decision == Hypothesis::kNoise);
}

TEST_CASE("ROC staircase and AUC on a hand-made example") {
  const std::vector<double> h0{0.1, 0.4, 0.35, 0.8};
  const std::vector<double> h1{0.9, 0.4, 0.6};
  const auto roc = roc_from_scores(h0, h1);
  CHECK(roc.front().fap == 0.0);
  CHECK(roc.front().pd == 0.0);
  CHECK(roc.back().fap == 1.0);
  CHECK(roc.back().pd == 1.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].fap >= roc[i - 1].fap);
    CHECK(roc[i].pd >= roc[i - 1].pd);
  }
  // scores: 0.9 h1 | 0.8 h0 | 0.6 h1 | 0.4 tie h0+h1 | 0.35 h0 | 0.1 h0
  REQUIRE(roc.size() == 7);
  CHECK(roc[1].pd == doctest::Approx(1.0 / 3));
  CHECK(roc[2].fap == doctest::Approx(0.25));
  CHECK(roc[4].fap == doctest::Approx(0.5));
  CHECK(roc[4].pd == 1.0);
  // Mann-Whitney: pairs with h1 > h0 counted, ties halved
  double wins = 0.0;
  for (double a : h1)
    for (double b : h0) wins += a > b ? 1.0 : a == b ? 0.5 : 0.0;
  CHECK(roc_auc(h0, h1) == doctest::Approx(wins / 12.0).epsilon(1e-15));
}

TEST_CASE("calibrated thresholds hold their false-alarm rate on fresh data") {
  const auto cfg = ArrayConfig::fully_digital(8);
  const EigenStatisticFn stat = [](std::span<const double> e) { return maxmin_statistic(e).value; };
  const double fap = 0.1;
  const int n = 2000;
  const double tau = calibrate_threshold(stat, cfg, 1.0, 20, fap, n, 11);
  const auto scen = EmitterScenario::single(10.0, -5.0, 20);
  auto run = roc_curve([&](const CovarianceEstimate& c) {
    return stat({c.eigenvalues.data(), static_cast<std::size_t>(c.eigenvalues.size())});
  }, scen, cfg, n, 12);
  const double emp = detection_rate(run.h0_scores, tau);
  const double se = std::sqrt(fap * (1 - fap) / n);
  CHECK(std::abs(emp - fap) < 2.576 * se * 1.5);
  CHECK(detection_rate(run.h1_scores, tau) > fap);
  CHECK(roc_auc(run.h0_scores, run.h1_scores) > 0.6);
  CHECK_THROWS_AS(calibrate_threshold(stat, cfg, 1.0, 20, 0.01, 500, 1), ContractError);
}

TEST_CASE("ROC runs are independent of the worker count") {
  const auto cfg = ArrayConfig::fully_digital(6);
  const auto scen = EmitterScenario::single(0.0, -3.0, 30);
  const ScoreFn score = [](const CovarianceEstimate& c) { return c.eigenvalues(0) / c.eigenvalues(c.size() - 1); };
  const auto a = roc_curve(score, scen, cfg, 1000, 3, 1);
  const auto b = roc_curve(score, scen, cfg, 1000, 3, 3);
  CHECK(a.h0_scores == b.h0_scores);
  CHECK(a.h1_scores == b.h1_scores);
}

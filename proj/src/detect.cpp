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

#include "doalab/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "doalab/errors.hpp"
#include "doalab/parallel.hpp"

namespace doalab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_eigs(std::span<const double> eigs) {
  if (eigs.size() < 2) throw ContractError("detection statistics need P >= 2 eigenvalues");
}

}  // namespace

Statistic maxmin_statistic(std::span<const double> eigs) {
  require_eigs(eigs);
  const double lmax = eigs.front();
  const double lmin = eigs.back();
  if (!(lmin > 0.0)) return {kInf, true};
  return {lmax / lmin, false};
}

Statistic glrt_statistic(std::span<const double> eigs, GlrtForm form) {
  require_eigs(eigs);
  const double n = static_cast<double>(eigs.size());
  const double mean = std::accumulate(eigs.begin(), eigs.end(), 0.0) / n;
  if (!(mean > 0.0)) return {kInf, true};
  if (form == GlrtForm::kRankOne) return {eigs.front() / mean, false};
  if (!(eigs.back() > 0.0)) return {kInf, true};
  double log_sum = 0.0;
  for (double l : eigs) log_sum += std::log(l);
  return {mean / std::exp(log_sum / n), false};
}

DetectionResult decide(double statistic, double threshold, std::string detector) {
  return {statistic, threshold, statistic > threshold ? Hypothesis::kSignal : Hypothesis::kNoise,
          std::move(detector)};
}

double upper_quantile(std::vector<double> samples, double fap) {
  if (samples.empty()) throw ContractError("quantile of an empty sample");
  if (!(fap > 0.0 && fap < 1.0)) throw ContractError("false-alarm target must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto k = static_cast<std::ptrdiff_t>(std::ceil((1.0 - fap) * n - 1e-9)) - 1;
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(samples.size()) - 1);
  return samples[static_cast<std::size_t>(k)];
}

double calibrate_threshold(const EigenStatisticFn& statistic, const ArrayConfig& cfg,
                           double noise_power, int n_snapshots, double target_fap, int n_trials,
                           std::uint64_t seed, int workers) {
  if (!(target_fap > 0.0 && target_fap < 1.0))
    throw ContractError("false-alarm target must lie in (0, 1)");
  if (static_cast<double>(n_trials) < 100.0 / target_fap - 1e-9)
    throw ContractError(fmt::format("{} trials cannot resolve a false-alarm rate of {} (need {})",
                                    n_trials, target_fap, std::ceil(100.0 / target_fap)));
  const auto scen = EmitterScenario::noise_only(n_snapshots, noise_power);
  std::vector<double> values(static_cast<std::size_t>(n_trials));
  parallel_for(values.size(), workers, [&](std::size_t i) {
    auto rng = trial_stream(seed, i, StreamPurpose::kCalibration);
    const auto cov = sample_covariance(synthesize_snapshots(cfg, scen, rng), EigenMode::kValuesOnly);
    values[i] = statistic({cov.eigenvalues.data(), static_cast<std::size_t>(cov.eigenvalues.size())});
  });
  return upper_quantile(std::move(values), target_fap);
}

std::vector<RocPoint> roc_from_scores(std::span<const double> h0_scores,
                                      std::span<const double> h1_scores) {
  if (h0_scores.empty() || h1_scores.empty()) throw ContractError("ROC needs scores for both hypotheses");
  struct Tagged {
    double score;
    bool signal;
  };
  std::vector<Tagged> pooled;
  pooled.reserve(h0_scores.size() + h1_scores.size());
  for (double s : h0_scores) pooled.push_back({s, false});
  for (double s : h1_scores) pooled.push_back({s, true});
  std::sort(pooled.begin(), pooled.end(), [](const Tagged& a, const Tagged& b) { return a.score > b.score; });
  const double n0 = static_cast<double>(h0_scores.size());
  const double n1 = static_cast<double>(h1_scores.size());
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t fa = 0, det = 0;
  for (std::size_t i = 0; i < pooled.size();) {
    const double s = pooled[i].score;
    for (; i < pooled.size() && pooled[i].score == s; ++i) (pooled[i].signal ? det : fa) += 1;
    curve.push_back({static_cast<double>(fa) / n0, static_cast<double>(det) / n1});
  }
  return curve;
}

double roc_auc(std::span<const double> h0_scores, std::span<const double> h1_scores) {
  std::vector<double> h0(h0_scores.begin(), h0_scores.end());
  std::sort(h0.begin(), h0.end());
  double wins = 0.0;
  for (double s : h1_scores) {
    const auto lo = std::lower_bound(h0.begin(), h0.end(), s);
    const auto hi = std::upper_bound(lo, h0.end(), s);
    wins += static_cast<double>(lo - h0.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(h0.size()) * static_cast<double>(h1_scores.size()));
}

double detection_rate(std::span<const double> h1_scores, double threshold) {
  if (h1_scores.empty()) return 0.0;
  const auto hits = std::count_if(h1_scores.begin(), h1_scores.end(), [&](double s) { return s > threshold; });
  return static_cast<double>(hits) / static_cast<double>(h1_scores.size());
}

RocRun roc_curve(const ScoreFn& score, const EmitterScenario& scenario_h1, const ArrayConfig& cfg,
                 int n_trials, std::uint64_t seed, int workers) {
  if (n_trials < 1000) throw ContractError("ROC estimation needs at least 1000 trials per hypothesis");
  const auto scenario_h0 = EmitterScenario::noise_only(scenario_h1.n_snapshots, scenario_h1.noise_power);
  RocRun run;
  run.h0_scores.resize(static_cast<std::size_t>(n_trials));
  run.h1_scores.resize(static_cast<std::size_t>(n_trials));
  parallel_for(static_cast<std::size_t>(n_trials), workers, [&](std::size_t i) {
    auto rng0 = trial_stream(seed, i, StreamPurpose::kNullHypothesis);
    run.h0_scores[i] = score(sample_covariance(synthesize_snapshots(cfg, scenario_h0, rng0), EigenMode::kValuesOnly));
    auto rng1 = trial_stream(seed, i, StreamPurpose::kSignalHypothesis);
    run.h1_scores[i] = score(sample_covariance(synthesize_snapshots(cfg, scenario_h1, rng1), EigenMode::kValuesOnly));
  });
  run.curve = roc_from_scores(run.h0_scores, run.h1_scores);
  return run;
}

}  // namespace doalab

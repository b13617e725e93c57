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

#include "doalab/doa_est.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "doalab/crlb.hpp"
#include "doalab/errors.hpp"
#include "doalab/kernels.hpp"
#include "doalab/spectral.hpp"

namespace doalab {
namespace {

constexpr double kLatticeSlack = 1e-12;

double mean_power(const CMatrix& rows) {
  return kernels::active().sum_abs2({rows.data(), static_cast<std::size_t>(rows.size())}) /
         static_cast<double>(rows.size());
}

double theta_deg_of(double u) { return degrees_from_sine(std::clamp(u, -1.0, 1.0)); }

void require_single_emitter(const EmitterScenario& scen) {
  scen.validate();
  if (scen.directions_deg.size() != 1)
    throw ContractError("DOA estimators handle exactly one emitter");
}

std::vector<int> channel_range(int first, int count) {
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = first + i;
  return out;
}

double clamp_crlb_theta(double u) {
  // Bounds are evaluated at the estimate; keep it off endfire.
  return theta_deg_of(std::clamp(u, -0.999999, 0.999999));
}

struct FirstLook {
  double u_hat = 0.0;
  CandidateSet set;
};

FirstLook candidate_look(const SnapshotBatch& elements, const ArrayConfig& cfg) {
  const auto first = elements.snapshot_range(0, 1);
  const auto combined = analog_combine(first, cfg, AnalogWeights::steered(cfg.m_sub, cfg.spacing, 0.0));
  const auto had = combined.channel_subset(channel_range(0, cfg.k_sub));
  const auto cov = sample_covariance(had);
  FirstLook look;
  look.u_hat = root_music(cov, 1, cfg.spacing * cfg.m_sub).front();
  look.set = candidate_set(look.u_hat, cfg.m_sub, cfg.spacing);
  if (look.set.candidates.empty()) throw EstimationFailure("ambiguity lattice has no candidate in [-1, 1)");
  return look;
}

void require_pure_had(const ArrayConfig& cfg) {
  cfg.validate();
  if (cfg.n_fd != 0) throw ConfigError("this estimator needs a pure HAD array (N_F = 0)");
  if (cfg.k_sub < 2) throw ConfigError("HAD Root-MUSIC needs at least two subarrays");
}

DoaEstimate finish(double u, std::string method, int consumed, double crlb, std::optional<CandidateSet> set) {
  DoaEstimate est;
  est.u = u;
  est.degrees = theta_deg_of(u);
  est.method = std::move(method);
  est.snapshots_consumed = consumed;
  est.crlb_rad2 = crlb;
  est.candidates = std::move(set);
  return est;
}

}  // namespace

CandidateSet candidate_set(double u_hat, int m_sub, double spacing) {
  if (m_sub < 1 || !(spacing > 0.0)) throw ContractError("candidate set needs M >= 1 and d > 0");
  CandidateSet set;
  set.base = u_hat;
  set.period = 1.0 / (m_sub * spacing);
  const double k_lo = std::ceil((-1.0 - u_hat) / set.period - kLatticeSlack);
  for (double k = k_lo;; k += 1.0) {
    const double c = u_hat + k * set.period;
    if (c >= 1.0) break;
    if (c >= -1.0) set.candidates.push_back(c);
  }
  return set;
}

double nearest_candidate(const CandidateSet& set, double u_ref) {
  if (set.candidates.empty()) throw EstimationFailure("empty candidate set");
  double best = set.candidates.front();
  double best_dist = std::abs(best - u_ref);
  for (double c : set.candidates) {
    const double d = std::abs(c - u_ref);
    if (d < best_dist || (d == best_dist && std::abs(c) < std::abs(best))) {
      best = c;
      best_dist = d;
    }
  }
  return best;
}

Combined combine_estimates(double u_a, double crlb_a, double u_b, double crlb_b) {
  if (!(crlb_a > 0.0) || !(crlb_b > 0.0)) throw DomainError("combiner needs positive bounds");
  const double info_a = std::isinf(crlb_a) ? 0.0 : 1.0 / crlb_a;
  const double info_b = std::isinf(crlb_b) ? 0.0 : 1.0 / crlb_b;
  const double info = info_a + info_b;
  if (!(info > 0.0)) throw NumericalFailure("neither estimate carries information");
  return {(info_a * u_a + info_b * u_b) / info, 1.0 / info};
}

std::vector<int> fhad_subgroups(int k_sub, int n_groups) {
  if (n_groups < 1 || k_sub < n_groups)
    throw ConfigError(fmt::format("FHAD needs at least one subarray per candidate ({} subarrays, {} candidates)",
                                  k_sub, n_groups));
  const int base = k_sub / n_groups;
  std::vector<int> group(static_cast<std::size_t>(k_sub));
  for (int k = 0; k < k_sub; ++k)
    group[static_cast<std::size_t>(k)] = k < base * n_groups ? k / base : (k - base * n_groups) % n_groups;
  return group;
}

DoaEstimate had_root_music_classic(const SnapshotBatch& elements, const ArrayConfig& cfg, double snr_db) {
  require_pure_had(cfg);
  const FirstLook look = candidate_look(elements, cfg);
  const int n_cand = look.set.size();
  if (elements.snapshots() < 1 + n_cand)
    throw ContractError(fmt::format("classic HAD estimator needs {} snapshots, batch has {}", 1 + n_cand,
                                    elements.snapshots()));
  double best_power = -1.0;
  double best_u = look.set.candidates.front();
  for (int j = 0; j < n_cand; ++j) {
    const double cand = look.set.candidates[static_cast<std::size_t>(j)];
    const auto probe = analog_combine(elements.snapshot_range(1 + j, 1), cfg,
                                      AnalogWeights::steered(cfg.m_sub, cfg.spacing, cand));
    const double power = mean_power(probe.samples);
    if (power > best_power) {
      best_power = power;
      best_u = cand;
    }
  }
  const double crlb = crlb_had(cfg, clamp_crlb_theta(best_u), snr_db, 1, 0.0);
  return finish(best_u, "had-root-music", 1 + n_cand, crlb, look.set);
}

DoaEstimate fhad_root_music(const SnapshotBatch& elements, const ArrayConfig& cfg, double snr_db) {
  require_pure_had(cfg);
  const FirstLook look = candidate_look(elements, cfg);
  const int n_cand = look.set.size();
  const auto groups = fhad_subgroups(cfg.k_sub, n_cand);
  if (elements.snapshots() < 2) throw ContractError("FHAD estimator needs two snapshots");
  std::vector<AnalogWeights> weights;
  weights.reserve(groups.size());
  for (int g : groups)
    weights.push_back(AnalogWeights::steered(cfg.m_sub, cfg.spacing, look.set.candidates[static_cast<std::size_t>(g)]));
  const auto probe = analog_combine(elements.snapshot_range(1, 1), cfg, weights);
  std::vector<double> power(static_cast<std::size_t>(n_cand), 0.0);
  std::vector<int> members(static_cast<std::size_t>(n_cand), 0);
  for (int k = 0; k < cfg.k_sub; ++k) {
    const auto g = static_cast<std::size_t>(groups[static_cast<std::size_t>(k)]);
    power[g] += std::norm(probe.samples(k, 0));
    members[g] += 1;
  }
  std::size_t best = 0;
  for (std::size_t g = 0; g < power.size(); ++g) {
    power[g] /= members[g];
    if (power[g] > power[best]) best = g;
  }
  const double u = look.set.candidates[best];
  const double crlb = crlb_had(cfg, clamp_crlb_theta(u), snr_db, 1, 0.0);
  return finish(u, "fhad-root-music", 2, crlb, look.set);
}

DoaEstimate fd_root_music(const SnapshotBatch& batch, double spacing, double snr_db) {
  if (batch.channels() < 2) throw ContractError("Root-MUSIC needs at least two channels");
  const auto cov = sample_covariance(batch);
  double u = root_music(cov, 1, spacing).front();
  bool clamped = false;
  if (std::abs(u) > 1.0) {
    u = std::clamp(u, -1.0, 1.0);
    clamped = true;
  }
  const ArrayConfig fd = ArrayConfig::fully_digital(batch.channels(), spacing);
  DoaEstimate est = finish(u, "fd-root-music", batch.snapshots(),
                           crlb_fd(fd, clamp_crlb_theta(u), snr_db, batch.snapshots()), std::nullopt);
  est.clamped = clamped;
  return est;
}

DoaEstimate tlhad_estimate(const SnapshotBatch& elements, const ArrayConfig& cfg, double snr_db, int snapshots) {
  cfg.validate();
  if (snapshots < 1 || elements.snapshots() < snapshots)
    throw ContractError(fmt::format("two-layer estimator needs {} snapshots, batch has {}", snapshots,
                                    elements.snapshots()));
  if (cfg.n_fd < 2) throw ConfigError("two-layer estimator needs at least two FD antennas");
  if (cfg.k_sub == 1) throw ConfigError("two-layer estimator needs K >= 2 subarrays (or none)");
  const auto window = elements.snapshot_range(0, snapshots);
  if (cfg.k_sub == 0) {
    DoaEstimate est = fd_root_music(window, cfg.spacing, snr_db);
    est.method = "tlhad";
    return est;
  }
  const auto combined = analog_combine(window, cfg, AnalogWeights::steered(cfg.m_sub, cfg.spacing, 0.0));

  const auto fd_part = combined.channel_subset(channel_range(cfg.k_sub, cfg.n_fd));
  double u_fd = root_music(sample_covariance(fd_part), 1, cfg.spacing).front();
  bool clamped = false;
  if (std::abs(u_fd) > 1.0) {
    u_fd = std::clamp(u_fd, -1.0, 1.0);
    clamped = true;
  }

  const auto had_part = combined.channel_subset(channel_range(0, cfg.k_sub));
  const double u_had = root_music(sample_covariance(had_part), 1, cfg.spacing * cfg.m_sub).front();
  CandidateSet set = candidate_set(u_had, cfg.m_sub, cfg.spacing);
  const double chosen = nearest_candidate(set, u_fd);

  const double theta_ref = clamp_crlb_theta(u_fd);
  const ArrayConfig had_cfg = ArrayConfig::hybrid(cfg.k_sub, cfg.m_sub, cfg.spacing);
  const ArrayConfig fd_cfg = ArrayConfig::fully_digital(cfg.n_fd, cfg.spacing);
  const double crlb_had_part = crlb_had(had_cfg, theta_ref, snr_db, snapshots, 0.0);
  const double crlb_fd_part = crlb_fd(fd_cfg, theta_ref, snr_db, snapshots);
  const Combined mix = combine_estimates(chosen, crlb_had_part, u_fd, crlb_fd_part);

  DoaEstimate est = finish(std::clamp(mix.u, -1.0, 1.0), "tlhad", snapshots,
                           crlb_tlhad(cfg, theta_ref, snr_db, snapshots, 0.0), std::move(set));
  est.clamped = clamped;
  return est;
}

DoaEstimate had_root_music_classic(const ArrayConfig& cfg, const EmitterScenario& scen, Philox4x32& rng) {
  require_single_emitter(scen);
  EmitterScenario s = scen;
  s.n_snapshots = static_cast<int>(std::ceil(2.0 * cfg.m_sub * cfg.spacing)) + 1;
  return had_root_music_classic(synthesize_snapshots(cfg, s, rng), cfg, scen.snr_db());
}

DoaEstimate fhad_root_music(const ArrayConfig& cfg, const EmitterScenario& scen, Philox4x32& rng) {
  require_single_emitter(scen);
  EmitterScenario s = scen;
  s.n_snapshots = 2;
  return fhad_root_music(synthesize_snapshots(cfg, s, rng), cfg, scen.snr_db());
}

DoaEstimate tlhad_estimate(const ArrayConfig& cfg, const EmitterScenario& scen, Philox4x32& rng) {
  require_single_emitter(scen);
  return tlhad_estimate(synthesize_snapshots(cfg, scen, rng), cfg, scen.snr_db(), scen.n_snapshots);
}

}  // namespace doalab

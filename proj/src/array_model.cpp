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

#include "doalab/array_model.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "doalab/errors.hpp"

namespace doalab {

double direction_sine(double theta_deg) { return std::sin(theta_deg * std::numbers::pi / 180.0); }

double degrees_from_sine(double u) { return std::asin(u) * 180.0 / std::numbers::pi; }

ArrayConfig ArrayConfig::fully_digital(int n, double spacing) {
  ArrayConfig c{n, 1, 0, n, spacing};
  c.validate();
  return c;
}

ArrayConfig ArrayConfig::hybrid(int k_sub, int m_sub, double spacing) {
  ArrayConfig c{k_sub * m_sub, m_sub, k_sub, 0, spacing};
  c.validate();
  return c;
}

ArrayConfig ArrayConfig::two_layer(int k_sub, int m_sub, int n_fd, double spacing) {
  ArrayConfig c{k_sub * m_sub + n_fd, m_sub, k_sub, n_fd, spacing};
  c.validate();
  return c;
}

void ArrayConfig::validate() const {
  if (n_total < 1 || k_sub < 0 || n_fd < 0 || m_sub < 0)
    throw ContractError(fmt::format("ArrayConfig: invalid counts N={} K={} M={} N_F={}", n_total,
                                    k_sub, m_sub, n_fd));
  if (k_sub > 0 && m_sub < 1) throw ContractError("ArrayConfig: subarrays need M >= 1");
  if (k_sub * m_sub + n_fd != n_total)
    throw ContractError(fmt::format("ArrayConfig: N={} != K*M + N_F = {}*{} + {}", n_total, k_sub,
                                    m_sub, n_fd));
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ContractError("ArrayConfig: spacing must be positive");
}

EtaLayout layout_for_proportion(int n_total, int m_sub, double eta, double spacing) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ContractError("fd proportion must lie in [0, 1]");
  if (m_sub < 1 || n_total < 1) throw ContractError("layout needs N >= 1 and M >= 1");
  const int requested = static_cast<int>(std::floor(eta * n_total + 1e-9));
  int n_fd = requested;
  while ((n_total - n_fd) % m_sub != 0) --n_fd;
  if (n_fd < 0) throw ContractError("no layout with a whole number of subarrays");
  const int k_sub = (n_total - n_fd) / m_sub;
  EtaLayout out;
  out.config = ArrayConfig{n_total, m_sub, k_sub, n_fd, spacing};
  out.config.validate();
  out.rounded = n_fd != requested || std::abs(eta * n_total - requested) > 1e-9;
  return out;
}

EmitterScenario EmitterScenario::noise_only(int n_snapshots, double noise_power) {
  EmitterScenario s;
  s.noise_power = noise_power;
  s.n_snapshots = n_snapshots;
  s.validate();
  return s;
}

EmitterScenario EmitterScenario::single(double theta_deg, double snr_db, int n_snapshots,
                                        double noise_power) {
  EmitterScenario s;
  s.directions_deg = {theta_deg};
  s.powers = {noise_power * std::pow(10.0, snr_db / 10.0)};
  s.noise_power = noise_power;
  s.n_snapshots = n_snapshots;
  s.validate();
  return s;
}

double EmitterScenario::snr_linear() const {
  double total = 0.0;
  for (double p : powers) total += p;
  return total / noise_power;
}

double EmitterScenario::snr_db() const { return 10.0 * std::log10(snr_linear()); }

void EmitterScenario::validate() const {
  if (directions_deg.size() != powers.size())
    throw ContractError("EmitterScenario: one power per direction required");
  for (double d : directions_deg)
    if (!(d > -90.0 && d < 90.0))
      throw ContractError(fmt::format("EmitterScenario: direction {} outside (-90, 90)", d));
  for (double p : powers)
    if (!(p > 0.0)) throw ContractError("EmitterScenario: powers must be positive");
  if (!(noise_power > 0.0)) throw ContractError("EmitterScenario: noise power must be positive");
  if (n_snapshots < 1) throw ContractError("EmitterScenario: need at least one snapshot");
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kElement:
      return "element";
    case Stage::kAnalogCombined:
      return "analog-combined";
    case Stage::kQuantized:
      return "quantized";
  }
  return "?";
}

bool SnapshotBatch::all_finite() const { return samples.allFinite(); }

SnapshotBatch SnapshotBatch::snapshot_range(int first, int count) const {
  if (first < 0 || count < 0 || first + count > snapshots())
    throw ContractError(fmt::format("snapshot range [{}, {}) outside batch of {}", first,
                                    first + count, snapshots()));
  return SnapshotBatch{samples.middleCols(first, count), stage, channel_map};
}

SnapshotBatch SnapshotBatch::channel_subset(std::span<const int> channels) const {
  SnapshotBatch out;
  out.stage = stage;
  out.samples.resize(static_cast<Eigen::Index>(channels.size()), samples.cols());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const int c = channels[i];
    if (c < 0 || c >= this->channels()) throw ContractError("channel index out of range");
    out.samples.row(static_cast<Eigen::Index>(i)) = samples.row(c);
    out.channel_map.push_back(channel_map.at(static_cast<std::size_t>(c)));
  }
  return out;
}

AnalogWeights AnalogWeights::steered(int m_sub, double spacing, double u_steer) {
  if (m_sub < 1) throw ContractError("analog weights need M >= 1");
  if (std::abs(u_steer) > 1.0) throw DomainError("analog steering sine outside [-1, 1]");
  const double norm = 1.0 / std::sqrt(static_cast<double>(m_sub));
  CVector w(m_sub);
  for (int m = 0; m < m_sub; ++m) w[m] = std::polar(norm, kTwoPi * spacing * m * u_steer);
  return AnalogWeights(std::move(w));
}

AnalogWeights AnalogWeights::from_phases(std::span<const double> phases) {
  if (phases.empty()) throw ContractError("analog weights need M >= 1");
  const double norm = 1.0 / std::sqrt(static_cast<double>(phases.size()));
  CVector w(static_cast<Eigen::Index>(phases.size()));
  for (std::size_t m = 0; m < phases.size(); ++m)
    w[static_cast<Eigen::Index>(m)] = std::polar(norm, phases[m]);
  return AnalogWeights(std::move(w));
}

CVector steering_vector(int n_elements, double spacing, double u) {
  if (!(std::abs(u) <= 1.0)) throw DomainError(fmt::format("direction sine {} outside [-1, 1]", u));
  if (n_elements < 1) throw ContractError("steering vector needs at least one element");
  CVector a(n_elements);
  for (int p = 0; p < n_elements; ++p) a[p] = std::polar(1.0, kTwoPi * spacing * p * u);
  return a;
}

cplx subarray_gain(int m_sub, double spacing, double u, double u_steer) {
  if (!(std::abs(u) <= 1.0) || !(std::abs(u_steer) <= 1.0))
    throw DomainError("subarray gain: direction sine outside [-1, 1]");
  if (m_sub < 1) throw ContractError("subarray gain needs M >= 1");
  cplx acc = 0.0;
  for (int m = 0; m < m_sub; ++m) acc += std::polar(1.0, kTwoPi * spacing * m * (u - u_steer));
  return acc / std::sqrt(static_cast<double>(m_sub));
}

SnapshotBatch synthesize_snapshots(const ArrayConfig& cfg, const EmitterScenario& scen,
                                   Philox4x32& rng) {
  cfg.validate();
  scen.validate();
  const int n = cfg.n_total;
  const int len = scen.n_snapshots;
  const std::size_t q_count = scen.directions_deg.size();

  std::vector<CVector> steering;
  steering.reserve(q_count);
  for (double deg : scen.directions_deg)
    steering.push_back(steering_vector(n, cfg.spacing, direction_sine(deg)));

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const double noise_sd = std::sqrt(scen.noise_power / 2.0);

  SnapshotBatch batch;
  batch.stage = Stage::kElement;
  batch.samples.resize(n, len);
  batch.channel_map.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) batch.channel_map[static_cast<std::size_t>(p)] = {ChannelSource::Kind::kElement, p};

  for (int t = 0; t < len; ++t) {
    auto col = batch.samples.col(t);
    for (int p = 0; p < n; ++p) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      col[p] = cplx(noise_sd * re, noise_sd * im);
    }
    for (std::size_t q = 0; q < q_count; ++q) {
      cplx s;
      if (scen.signal_model == SignalModel::kConstantModulus) {
        s = std::polar(std::sqrt(scen.powers[q]), phase(rng));
      } else {
        const double sd = std::sqrt(scen.powers[q] / 2.0);
        const double re = gauss(rng);
        const double im = gauss(rng);
        s = cplx(sd * re, sd * im);
      }
      col += steering[q] * s;
    }
  }
  return batch;
}

SnapshotBatch analog_combine(const SnapshotBatch& batch, const ArrayConfig& cfg,
                             std::span<const AnalogWeights> weights) {
  cfg.validate();
  if (batch.stage != Stage::kElement)
    throw ContractError(fmt::format("analog_combine expects element-stage data, got {}",
                                    to_string(batch.stage)));
  if (batch.channels() != cfg.n_total)
    throw ContractError("analog_combine: batch channel count does not match the array");
  if (static_cast<int>(weights.size()) != cfg.k_sub)
    throw ContractError(fmt::format("analog_combine: {} weight vectors for {} subarrays",
                                    weights.size(), cfg.k_sub));
  const int k_sub = cfg.k_sub;
  const int m_sub = cfg.m_sub;
  SnapshotBatch out;
  out.stage = Stage::kAnalogCombined;
  out.samples.resize(k_sub + cfg.n_fd, batch.snapshots());
  for (int k = 0; k < k_sub; ++k) {
    const auto& w = weights[static_cast<std::size_t>(k)].weights();
    if (w.size() != m_sub) throw ContractError("analog_combine: weight length != M");
    out.samples.row(k) = w.adjoint() * batch.samples.middleRows(k * m_sub, m_sub);
    out.channel_map.push_back({ChannelSource::Kind::kSubarray, k});
  }
  const int fd_start = k_sub * m_sub;
  if (cfg.n_fd > 0) {
    out.samples.bottomRows(cfg.n_fd) = batch.samples.middleRows(fd_start, cfg.n_fd);
    for (int p = 0; p < cfg.n_fd; ++p) out.channel_map.push_back({ChannelSource::Kind::kElement, fd_start + p});
  }
  return out;
}

SnapshotBatch analog_combine(const SnapshotBatch& batch, const ArrayConfig& cfg,
                             const AnalogWeights& shared) {
  std::vector<AnalogWeights> all(static_cast<std::size_t>(cfg.k_sub), shared);
  return analog_combine(batch, cfg, all);
}

}  // namespace doalab

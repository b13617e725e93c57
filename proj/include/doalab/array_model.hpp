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

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "doalab/rng.hpp"

namespace doalab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Degrees appear only at the I/O boundary; everything else works in u = sin(theta).
double direction_sine(double theta_deg);
double degrees_from_sine(double u);

// Receive ULA: the first k_sub * m_sub antennas feed analog subarrays, the
// remaining n_fd antennas each have their own RF chain.
struct ArrayConfig {
  int n_total = 0;
  int m_sub = 1;
  int k_sub = 0;
  int n_fd = 0;
  double spacing = 0.5;  // wavelengths

  static ArrayConfig fully_digital(int n, double spacing = 0.5);
  static ArrayConfig hybrid(int k_sub, int m_sub, double spacing = 0.5);
  static ArrayConfig two_layer(int k_sub, int m_sub, int n_fd, double spacing = 0.5);

  double fd_proportion() const { return n_total > 0 ? static_cast<double>(n_fd) / n_total : 0.0; }
  int hybrid_antennas() const { return k_sub * m_sub; }
  void validate() const;  // throws ContractError

  bool operator==(const ArrayConfig&) const = default;
};

// Split n_total antennas into a HAD block of M-antenna subarrays and an FD
// block holding roughly the proportion eta. N_F is rounded down until the HAD
// block is a whole number of subarrays; `rounded` reports whether that happened.
struct EtaLayout {
  ArrayConfig config;
  bool rounded = false;
};
EtaLayout layout_for_proportion(int n_total, int m_sub, double eta, double spacing = 0.5);

enum class SignalModel { kConstantModulus, kComplexGaussian };

struct EmitterScenario {
  std::vector<double> directions_deg;
  std::vector<double> powers;
  double noise_power = 1.0;
  int n_snapshots = 1;
  SignalModel signal_model = SignalModel::kConstantModulus;

  static EmitterScenario noise_only(int n_snapshots, double noise_power = 1.0);
  static EmitterScenario single(double theta_deg, double snr_db, int n_snapshots,
                                double noise_power = 1.0);

  double snr_linear() const;  // total signal power / noise power
  double snr_db() const;
  void validate() const;
};

enum class Stage { kElement, kAnalogCombined, kQuantized };
std::string_view to_string(Stage s);

struct ChannelSource {
  enum class Kind { kElement, kSubarray };
  Kind kind = Kind::kElement;
  int index = 0;  // antenna index or subarray index
  bool operator==(const ChannelSource&) const = default;
};

struct SnapshotBatch {
  CMatrix samples;  // channels x snapshots
  Stage stage = Stage::kElement;
  std::vector<ChannelSource> channel_map;

  int channels() const { return static_cast<int>(samples.rows()); }
  int snapshots() const { return static_cast<int>(samples.cols()); }
  bool all_finite() const;

  SnapshotBatch snapshot_range(int first, int count) const;
  // Keeps the given channels (in order).
  SnapshotBatch channel_subset(std::span<const int> channels) const;
};

// Per-subarray phase-shifter settings; every weight has modulus 1/sqrt(M).
class AnalogWeights {
 public:
  // Weights w_m = exp(i 2 pi d m u_steer) / sqrt(M), so w^H a(u) = subarray_gain(u, u_steer).
  static AnalogWeights steered(int m_sub, double spacing, double u_steer);
  static AnalogWeights from_phases(std::span<const double> phases);

  int size() const { return static_cast<int>(weights_.size()); }
  const CVector& weights() const { return weights_; }

 private:
  explicit AnalogWeights(CVector w) : weights_(std::move(w)) {}
  CVector weights_;
};

// a_p(u) = exp(i 2 pi d p u), p = 0..P-1.
CVector steering_vector(int n_elements, double spacing, double u);

cplx subarray_gain(int m_sub, double spacing, double u, double u_steer);

// x(t) = sum_q a(u_q) s_q(t) + n(t) over all n_total antennas.
SnapshotBatch synthesize_snapshots(const ArrayConfig& cfg, const EmitterScenario& scen,
                                   Philox4x32& rng);

// Channel k < K is w_k^H times subarray k's element samples; the n_fd digital
// channels follow unchanged.
SnapshotBatch analog_combine(const SnapshotBatch& batch, const ArrayConfig& cfg,
                             std::span<const AnalogWeights> weights);
SnapshotBatch analog_combine(const SnapshotBatch& batch, const ArrayConfig& cfg,
                             const AnalogWeights& shared);

}  // namespace doalab

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

#include <optional>
#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

// Quantizer resolution per real dimension; std::nullopt inside means an ideal ADC.
class Bits {
 public:
  static constexpr int kMax = 16;

  explicit Bits(int b);  // throws DomainError unless 1 <= b <= kMax
  static Bits infinite() { return Bits(); }

  bool is_infinite() const { return !bits_.has_value(); }
  int value() const;  // throws ContractError when infinite

  bool operator==(const Bits&) const = default;

 private:
  Bits() = default;
  std::optional<int> bits_;
};

// Optimal (Lloyd-Max) quantizer for a zero-mean unit-variance Gaussian.
struct LloydMaxCodebook {
  int bits = 0;
  std::vector<double> thresholds;  // 2^b - 1 ascending decision boundaries
  std::vector<double> levels;      // 2^b ascending reconstruction points
  double distortion = 0.0;         // E[(x - Q(x))^2]
  int iterations = 0;
  bool converged = false;
};

// Computed on first use by centroid/boundary iteration and cached; thread-safe.
const LloydMaxCodebook& lloyd_max_codebook(int bits);

// rho_b; 0 for an ideal ADC.
double distortion_factor(Bits b);

struct QuantizerConfig {
  Bits bits = Bits::infinite();
  double rho = 0.0;
  double alpha = 1.0;  // AQNM gain 1 - rho

  static QuantizerConfig make(Bits b);
};

// A Lloyd-Max codebook scaled per channel to the RMS of one real dimension of
// the data it was fitted on. Once fitted the scales are fixed, so applying the
// quantizer to its own output reproduces that output.
class Quantizer {
 public:
  static Quantizer fit(const SnapshotBatch& batch, const QuantizerConfig& q);

  SnapshotBatch apply(const SnapshotBatch& batch) const;

  const std::vector<double>& scales() const { return scales_; }
  const std::vector<int>& degenerate_channels() const { return degenerate_; }

 private:
  QuantizerConfig config_;
  std::vector<double> scales_;
  std::vector<int> degenerate_;
};

struct QuantizeResult {
  SnapshotBatch batch;
  std::vector<int> degenerate_channels;  // all-zero inputs, emitted as zeros
};

// Automatic gain control followed by independent I/Q quantization.
QuantizeResult quantize(const SnapshotBatch& batch, const QuantizerConfig& q);

// Per-channel AQNM: signal scaled by alpha^2, quantization noise of variance
// alpha (1 - alpha) times the input power.
double effective_snr(double snr_linear, double alpha);

// snr / effective_snr as a linear factor (>= 1) and in dB.
double performance_loss_factor(Bits b, double snr_db);
double performance_loss_db(Bits b, double snr_db);

}  // namespace doalab

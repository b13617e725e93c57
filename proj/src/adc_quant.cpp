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

#include "doalab/adc_quant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include <fmt/format.h>

#include "doalab/errors.hpp"
#include "doalab/kernels.hpp"

namespace doalab {
namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

constexpr double kTolerance = 1e-8;
// Plain Lloyd sweeps converge slowly once there are thousands of cells; past
// this many the iterate is handed to Newton.
constexpr int kMaxIterations = 2000;
constexpr int kNewtonSteps = 60;

// P(a < X < b) for 0 <= a < b, from the upper tail so far cells keep their digits.
double upper_mass(double a, double b) {
  const double qa = 0.5 * std::erfc(a / std::numbers::sqrt2);
  const double qb = std::isinf(b) ? 0.0 : 0.5 * std::erfc(b / std::numbers::sqrt2);
  return qa - qb;
}

// Cells of the positive half: [bounds[i], bounds[i+1]), bounds[0] = 0, last = inf.
void cell_bounds(const std::vector<double>& pos, std::vector<double>& bounds) {
  const std::size_t half = pos.size();
  bounds.assign(half + 1, 0.0);
  for (std::size_t i = 1; i < half; ++i) bounds[i] = 0.5 * (pos[i - 1] + pos[i]);
  bounds[half] = std::numeric_limits<double>::infinity();
}

double centroid(double a, double b, double mass) {
  return (normal_pdf(a) - (std::isinf(b) ? 0.0 : normal_pdf(b))) / mass;
}

double residual(const std::vector<double>& pos, std::vector<double>& bounds) {
  cell_bounds(pos, bounds);
  double worst = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i)
    worst = std::max(worst, std::abs(pos[i] - centroid(bounds[i], bounds[i + 1], upper_mass(bounds[i], bounds[i + 1]))));
  return worst;
}

// Newton on x_i = centroid(cell_i(x)). Cell i depends on x_{i-1}, x_i, x_{i+1}
// only, so the Jacobian is tridiagonal. Damped: a step is halved until the
// residual drops and the levels stay ordered.
bool newton_polish(std::vector<double>& pos, int& steps) {
  const std::size_t half = pos.size();
  std::vector<double> bounds, f(half), lo(half), di(half), up(half), trial(half);
  double res = residual(pos, bounds);
  for (steps = 0; steps < kNewtonSteps; ++steps) {
    if (res < 1e-15) return true;
    cell_bounds(pos, bounds);
    for (std::size_t i = 0; i < half; ++i) {
      const double a = bounds[i], b = bounds[i + 1];
      const double mass = upper_mass(a, b);
      const double c = centroid(a, b, mass);
      const double dca = i == 0 ? 0.0 : normal_pdf(a) * (c - a) / mass;
      const double dcb = std::isinf(b) ? 0.0 : normal_pdf(b) * (b - c) / mass;
      f[i] = pos[i] - c;
      lo[i] = -0.5 * dca;
      up[i] = -0.5 * dcb;
      di[i] = 1.0 - 0.5 * (dca + dcb);
    }
    // Thomas algorithm for J d = -f.
    for (std::size_t i = 1; i < half; ++i) {
      const double w = lo[i] / di[i - 1];
      di[i] -= w * up[i - 1];
      f[i] -= w * f[i - 1];
    }
    std::vector<double> d(half);
    d[half - 1] = -f[half - 1] / di[half - 1];
    for (std::size_t i = half - 1; i-- > 0;) d[i] = (-f[i] - up[i] * d[i + 1]) / di[i];
    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30 && !accepted; ++halving, scale *= 0.5) {
      bool ordered = true;
      for (std::size_t i = 0; i < half; ++i) {
        trial[i] = pos[i] + scale * d[i];
        if (!(trial[i] > (i == 0 ? 0.0 : trial[i - 1]))) ordered = false;
      }
      if (!ordered) continue;
      const double r = residual(trial, bounds);
      if (r < res) {
        pos = trial;
        res = r;
        accepted = true;
      }
    }
    if (!accepted) return res < kTolerance;  // at rounding level
  }
  return res < kTolerance;
}

// Inverse CDF by bisection; only used to seed the iteration.
double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

LloydMaxCodebook design(int bits) {
  const std::size_t n = std::size_t{1} << bits;
  const std::size_t half = n / 2;
  // Symmetric codebook: iterate on the positive half only. Start from the
  // high-rate companding solution (point density ~ pdf^(1/3), i.e. N(0, 3)).
  std::vector<double> pos(half);
  for (std::size_t i = 0; i < half; ++i) {
    const double p = 0.5 + 0.5 * (static_cast<double>(i) + 0.5) / static_cast<double>(half);
    pos[i] = std::sqrt(3.0) * normal_quantile(p);
  }
  std::vector<double> bounds(half + 1);  // bounds[0] = 0, bounds[half] = +inf
  LloydMaxCodebook cb;
  cb.bits = bits;
  for (cb.iterations = 1; cb.iterations <= kMaxIterations; ++cb.iterations) {
    bounds[0] = 0.0;
    for (std::size_t i = 1; i < half; ++i) bounds[i] = 0.5 * (pos[i - 1] + pos[i]);
    bounds[half] = std::numeric_limits<double>::infinity();
    double max_change = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      const double a = bounds[i], b = bounds[i + 1];
      const double c = centroid(a, b, upper_mass(a, b));
      max_change = std::max(max_change, std::abs(c - pos[i]));
      pos[i] = c;
    }
    if (max_change < kTolerance) {
      cb.converged = true;
      break;
    }
  }
  cb.iterations = std::min(cb.iterations, kMaxIterations);
  int steps = 0;
  cb.converged = newton_polish(pos, steps);
  cb.iterations += steps;
  cell_bounds(pos, bounds);

  // Per cell, E[(x - c)^2] = E[x^2] - c^2 P with E[x^2] = P + a pdf(a) - b pdf(b).
  // Summing cells avoids the cancellation of 1 - E[Q^2] at high resolution.
  double distortion = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = bounds[i], b = bounds[i + 1];
    const double mass = upper_mass(a, b);
    const double edge = a * normal_pdf(a) - (std::isinf(b) ? 0.0 : b * normal_pdf(b));
    distortion += 2.0 * (mass + edge - pos[i] * pos[i] * mass);
  }
  cb.distortion = distortion;

  cb.levels.resize(n);
  cb.thresholds.resize(n - 1);
  for (std::size_t i = 0; i < half; ++i) {
    cb.levels[half + i] = pos[i];
    cb.levels[half - 1 - i] = -pos[i];
  }
  cb.thresholds[half - 1] = 0.0;
  for (std::size_t i = 1; i < half; ++i) {
    cb.thresholds[half - 1 + i] = bounds[i];
    cb.thresholds[half - 1 - i] = -bounds[i];
  }
  return cb;
}

}  // namespace

Bits::Bits(int b) : bits_(b) {
  if (b < 1 || b > kMax) throw DomainError(fmt::format("quantizer bits {} outside [1, {}]", b, kMax));
}

int Bits::value() const {
  if (!bits_) throw ContractError("ideal ADC has no finite bit count");
  return *bits_;
}

const LloydMaxCodebook& lloyd_max_codebook(int bits) {
  if (bits < 1 || bits > Bits::kMax)
    throw DomainError(fmt::format("quantizer bits {} outside [1, {}]", bits, Bits::kMax));
  static std::array<std::once_flag, Bits::kMax + 1> once;
  static std::array<LloydMaxCodebook, Bits::kMax + 1> cache;
  const auto idx = static_cast<std::size_t>(bits);
  std::call_once(once[idx], [&] { cache[idx] = design(bits); });
  return cache[idx];
}

double distortion_factor(Bits b) {
  if (b.is_infinite()) return 0.0;
  return lloyd_max_codebook(b.value()).distortion;
}

QuantizerConfig QuantizerConfig::make(Bits b) {
  QuantizerConfig q;
  q.bits = b;
  q.rho = distortion_factor(b);
  q.alpha = 1.0 - q.rho;
  return q;
}

Quantizer Quantizer::fit(const SnapshotBatch& batch, const QuantizerConfig& q) {
  Quantizer out;
  out.config_ = q;
  const int channels = batch.channels();
  out.scales_.assign(static_cast<std::size_t>(channels), 0.0);
  const auto& k = kernels::active();
  for (int c = 0; c < channels; ++c) {
    const Eigen::VectorXcd row = batch.samples.row(c).transpose();
    const double power = k.sum_abs2({row.data(), static_cast<std::size_t>(row.size())});
    // RMS of one real dimension.
    const double scale = std::sqrt(power / (2.0 * std::max(1, batch.snapshots())));
    out.scales_[static_cast<std::size_t>(c)] = scale;
    if (!(scale > 0.0)) out.degenerate_.push_back(c);
  }
  return out;
}

SnapshotBatch Quantizer::apply(const SnapshotBatch& batch) const {
  if (batch.channels() != static_cast<int>(scales_.size()))
    throw ContractError("quantizer fitted on a different channel count");
  SnapshotBatch out{batch.samples, Stage::kQuantized, batch.channel_map};
  if (config_.bits.is_infinite()) return out;
  const auto& cb = lloyd_max_codebook(config_.bits.value());
  const auto& k = kernels::active();
  const auto len = static_cast<std::size_t>(batch.snapshots());
  std::vector<double> re(len), im(len), qre(len), qim(len);
  for (int c = 0; c < batch.channels(); ++c) {
    const double scale = scales_[static_cast<std::size_t>(c)];
    if (!(scale > 0.0)) {
      out.samples.row(c).setZero();
      continue;
    }
    for (std::size_t t = 0; t < len; ++t) {
      re[t] = batch.samples(c, static_cast<Eigen::Index>(t)).real();
      im[t] = batch.samples(c, static_cast<Eigen::Index>(t)).imag();
    }
    k.quantize(re, scale, cb.thresholds, cb.levels, qre);
    k.quantize(im, scale, cb.thresholds, cb.levels, qim);
    for (std::size_t t = 0; t < len; ++t) out.samples(c, static_cast<Eigen::Index>(t)) = cplx(qre[t], qim[t]);
  }
  return out;
}

QuantizeResult quantize(const SnapshotBatch& batch, const QuantizerConfig& q) {
  if (batch.stage == Stage::kQuantized)
    throw ContractError("quantize expects element or analog-combined data");
  const Quantizer quantizer = Quantizer::fit(batch, q);
  return QuantizeResult{quantizer.apply(batch), quantizer.degenerate_channels()};
}

double effective_snr(double snr_linear, double alpha) {
  if (!(snr_linear > 0.0)) throw DomainError("effective_snr needs a positive SNR");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("AQNM gain must lie in (0, 1]");
  return alpha * snr_linear / (alpha + (1.0 - alpha) * (1.0 + snr_linear));
}

double performance_loss_factor(Bits b, double snr_db) {
  if (b.is_infinite()) return 1.0;
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double alpha = 1.0 - distortion_factor(b);
  return snr / effective_snr(snr, alpha);
}

double performance_loss_db(Bits b, double snr_db) {
  return 10.0 * std::log10(performance_loss_factor(b, snr_db));
}

}  // namespace doalab

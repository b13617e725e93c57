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
#include <string>

#include "doalab/adc_quant.hpp"
#include "doalab/array_model.hpp"

namespace doalab {

// Effective single-source steering vector seen by the digital processor and
// its derivative with respect to theta (radians).
struct EffectiveArray {
  CVector a;
  CVector da;
};

// FD elements at positions first_element .. first_element + n - 1.
EffectiveArray fd_effective(int n, double spacing, double theta_rad, int first_element = 0);

// K subarrays of M antennas, all steered at u_steer, outputs only.
EffectiveArray had_effective(int k_sub, int m_sub, double spacing, double theta_rad, double u_steer);

// J = 2 T snr Re{ da^H (I - a a^H / a^H a) da } for the deterministic-signal model.
// Returns 0 for a degenerate (zero) steering vector.
double fim_single_source(const CVector& a, const CVector& da, int snapshots, double snr_linear);

// 1 / J, or +infinity when J is not positive.
double crlb_from_fim(double fisher);

double crlb_fd(const ArrayConfig& cfg, double theta_deg, double snr_db, int snapshots);

// HAD block of cfg. analog_steer_u defaults to the true direction (matched beams).
double crlb_had(const ArrayConfig& cfg, double theta_deg, double snr_db, int snapshots,
                std::optional<double> analog_steer_u = std::nullopt);

// Joint information of the HAD and FD blocks, J_HAD + J_FD.
double crlb_tlhad(const ArrayConfig& cfg, double theta_deg, double snr_db, int snapshots,
                  std::optional<double> analog_steer_u = std::nullopt);

// Scales an ideal-ADC bound by the AQNM performance-loss factor.
double crlb_quantized(double crlb_ideal, Bits b, double snr_db);

struct CrlbReport {
  std::string architecture;  // "FD", "HAD", "TLHAD", "quantized-FD", ...
  double theta_deg = 0.0;
  double snr_db = 0.0;
  int snapshots = 1;
  double crlb_rad2 = 0.0;
  double eta = 0.0;
  std::optional<int> bits;

  double crlb_deg2() const;
};

}  // namespace doalab

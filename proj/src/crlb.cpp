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

#include "doalab/crlb.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "doalab/errors.hpp"

namespace doalab {
namespace {

double snr_from_db(double snr_db) { return std::pow(10.0, snr_db / 10.0); }
double rad(double deg) { return deg * std::numbers::pi / 180.0; }

void require_theta(double theta_deg) {
  if (!(theta_deg >= -90.0 && theta_deg <= 90.0)) throw DomainError("direction outside [-90, 90] degrees");
}

}  // namespace

EffectiveArray fd_effective(int n, double spacing, double theta_rad, int first_element) {
  const double u = std::sin(theta_rad);
  const double du = std::cos(theta_rad);
  EffectiveArray e{CVector(n), CVector(n)};
  for (int p = 0; p < n; ++p) {
    const double pos = first_element + p;
    e.a[p] = std::polar(1.0, kTwoPi * spacing * pos * u);
    e.da[p] = cplx(0.0, kTwoPi * spacing * pos * du) * e.a[p];
  }
  return e;
}

EffectiveArray had_effective(int k_sub, int m_sub, double spacing, double theta_rad, double u_steer) {
  const double u = std::sin(theta_rad);
  const double du = std::cos(theta_rad);
  const double norm = 1.0 / std::sqrt(static_cast<double>(m_sub));
  cplx g = 0.0, dg = 0.0;  // subarray gain and its derivative in u
  for (int m = 0; m < m_sub; ++m) {
    const cplx term = std::polar(norm, kTwoPi * spacing * m * (u - u_steer));
    g += term;
    dg += cplx(0.0, kTwoPi * spacing * m) * term;
  }
  EffectiveArray e{CVector(k_sub), CVector(k_sub)};
  const double virtual_spacing = spacing * m_sub;
  for (int k = 0; k < k_sub; ++k) {
    const cplx b = std::polar(1.0, kTwoPi * virtual_spacing * k * u);
    e.a[k] = g * b;
    e.da[k] = (dg + g * cplx(0.0, kTwoPi * virtual_spacing * k)) * b * du;
  }
  return e;
}

double fim_single_source(const CVector& a, const CVector& da, int snapshots, double snr_linear) {
  if (a.size() != da.size()) throw ContractError("steering vector and derivative differ in length");
  if (snapshots < 1) throw ContractError("Fisher information needs at least one snapshot");
  const double norm2 = a.squaredNorm();
  if (!(norm2 > 1e-300)) return 0.0;
  const cplx proj = a.dot(da);  // a^H da
  const double quad = da.squaredNorm() - std::norm(proj) / norm2;
  return 2.0 * snapshots * snr_linear * std::max(0.0, quad);
}

double crlb_from_fim(double fisher) {
  if (!(fisher > 0.0) || !std::isfinite(fisher)) return std::numeric_limits<double>::infinity();
  return 1.0 / fisher;
}

double crlb_fd(const ArrayConfig& cfg, double theta_deg, double snr_db, int snapshots) {
  require_theta(theta_deg);
  const auto e = fd_effective(cfg.n_total, cfg.spacing, rad(theta_deg));
  return crlb_from_fim(fim_single_source(e.a, e.da, snapshots, snr_from_db(snr_db)));
}

namespace {

double had_fim(const ArrayConfig& cfg, double theta_deg, double snr, int snapshots,
               std::optional<double> steer) {
  if (cfg.k_sub < 1) return 0.0;
  const double u_steer = steer.value_or(direction_sine(theta_deg));
  const auto e = had_effective(cfg.k_sub, cfg.m_sub, cfg.spacing, rad(theta_deg), u_steer);
  return fim_single_source(e.a, e.da, snapshots, snr);
}

double fd_block_fim(const ArrayConfig& cfg, double theta_deg, double snr, int snapshots) {
  if (cfg.n_fd < 1) return 0.0;
  const auto e = fd_effective(cfg.n_fd, cfg.spacing, rad(theta_deg), cfg.hybrid_antennas());
  return fim_single_source(e.a, e.da, snapshots, snr);
}

}  // namespace

double crlb_had(const ArrayConfig& cfg, double theta_deg, double snr_db, int snapshots,
                std::optional<double> analog_steer_u) {
  require_theta(theta_deg);
  if (cfg.k_sub < 1) throw ContractError("HAD bound needs at least one subarray");
  return crlb_from_fim(had_fim(cfg, theta_deg, snr_from_db(snr_db), snapshots, analog_steer_u));
}

double crlb_tlhad(const ArrayConfig& cfg, double theta_deg, double snr_db, int snapshots,
                  std::optional<double> analog_steer_u) {
  require_theta(theta_deg);
  if (cfg.k_sub < 1 && cfg.n_fd < 2) throw ContractError("two-layer bound needs K >= 1 or N_F >= 2");
  const double snr = snr_from_db(snr_db);
  return crlb_from_fim(had_fim(cfg, theta_deg, snr, snapshots, analog_steer_u) +
                       fd_block_fim(cfg, theta_deg, snr, snapshots));
}

double crlb_quantized(double crlb_ideal, Bits b, double snr_db) {
  return crlb_ideal * performance_loss_factor(b, snr_db);
}

double CrlbReport::crlb_deg2() const {
  const double k = 180.0 / std::numbers::pi;
  return crlb_rad2 * k * k;
}

}  // namespace doalab

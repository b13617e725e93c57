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
#include <numbers>

#include "doalab/crlb.hpp"
#include "doalab/errors.hpp"

using namespace doalab;

namespace {

double closed_form_fd(int n, double theta_deg, double snr_db, int t, double d = 0.5) {
  const double c = 2.0 * std::numbers::pi * d * std::cos(theta_deg * std::numbers::pi / 180.0);
  const double snr = std::pow(10.0, snr_db / 10.0);
  return 6.0 / (t * snr * c * c * n * (static_cast<double>(n) * n - 1.0));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("FD bound matches the closed form") {
  for (int n : {2, 4, 8, 32, 64})
    for (double theta : {-60.0, -20.0, 0.0, 17.5, 45.0}) {
      const double got = crlb_fd(ArrayConfig::fully_digital(n), theta, 3.0, 7);
      CHECK(rel(got, closed_form_fd(n, theta, 3.0, 7)) < 1e-9);
    }
}

TEST_CASE("bounds scale exactly as 1/SNR and 1/T") {
  const auto tl = layout_for_proportion(64, 4, 0.25).config;
  const auto had = ArrayConfig::hybrid(16, 4);
  const auto fd = ArrayConfig::fully_digital(16);
  auto check = [](auto f) {
    const double base = f(0.0, 1);
    CHECK(rel(f(10.0, 1), base / 10.0) < 1e-12);
    CHECK(rel(f(0.0, 4), base / 4.0) < 1e-12);
  };
  // 30 deg would sit on a broadside null (u = 1/2); stay clear of it
  check([&](double s, int t) { return crlb_fd(fd, 25.0, s, t); });
  check([&](double s, int t) { return crlb_had(had, 25.0, s, t); });
  check([&](double s, int t) { return crlb_had(had, 25.0, s, t, 0.0); });
  check([&](double s, int t) { return crlb_tlhad(tl, 25.0, s, t, 0.0); });
}

TEST_CASE("derivatives match central differences") {
  const double h = 1e-6;
  for (double theta : {-0.7, 0.1, 0.52}) {
    auto check = [&](auto make) {
      const EffectiveArray e = make(theta);
      const EffectiveArray up = make(theta + h), down = make(theta - h);
      const CVector numeric = (up.a - down.a) / (2 * h);
      CHECK((numeric - e.da).norm() <= 1e-6 * e.da.norm());
    };
    check([](double t) { return fd_effective(12, 0.5, t); });
    check([](double t) { return fd_effective(5, 0.5, t, 48); });
    check([](double t) { return had_effective(8, 4, 0.5, t, 0.0); });
    check([](double t) { return had_effective(6, 3, 0.5, t, 0.25); });
  }
}

TEST_CASE("HAD effective vector equals combining the element steering vector") {
  const int k = 5, m = 4;
  const double theta = 0.4, us = -0.1;
  const auto e = had_effective(k, m, 0.5, theta, us);
  const CVector a = steering_vector(k * m, 0.5, std::sin(theta));
  const auto w = AnalogWeights::steered(m, 0.5, us);
  for (int i = 0; i < k; ++i) {
    const cplx want = w.weights().dot(a.segment(i * m, m));
    CHECK(std::abs(e.a[i] - want) < 1e-12);
  }
}

TEST_CASE("single-element subarrays reduce HAD to FD") {
  CHECK(rel(crlb_had(ArrayConfig::hybrid(10, 1), 25.0, 0.0, 1), crlb_fd(ArrayConfig::fully_digital(10), 25.0, 0.0, 1)) <
        1e-12);
}

TEST_CASE("two-layer information is the sum of its blocks") {
  for (double eta : {0.0625, 0.25, 0.5, 0.75}) {
    const auto tl = layout_for_proportion(64, 4, eta).config;
    const auto had = ArrayConfig::hybrid(tl.k_sub, tl.m_sub);
    const auto fd = ArrayConfig::fully_digital(tl.n_fd);
    for (std::optional<double> steer : {std::optional<double>{}, std::optional<double>{0.0}}) {
      const double j = 1.0 / crlb_tlhad(tl, 17.5, 5.0, 1, steer);
      const double parts = 1.0 / crlb_had(had, 17.5, 5.0, 1, steer) + 1.0 / crlb_fd(fd, 17.5, 5.0, 1);
      CHECK(rel(j, parts) < 1e-10);
    }
  }
  // no subarrays: pure FD
  const auto all_fd = layout_for_proportion(64, 4, 1.0).config;
  CHECK(rel(crlb_tlhad(all_fd, 10.0, 0.0, 1), crlb_fd(ArrayConfig::fully_digital(64), 10.0, 0.0, 1)) < 1e-12);
}

TEST_CASE("two-layer bound shrinks once the FD block dominates") {
  // Information grows like the cube of each block's aperture, so the bound is
  // not monotone in eta over the whole range; past eta = 1/2 it is.
  double prev = std::numeric_limits<double>::infinity();
  for (double eta : {0.5, 0.625, 0.75, 0.875, 1.0}) {
    const double c = crlb_tlhad(layout_for_proportion(64, 4, eta).config, 17.5, 10.0, 1, 0.0);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("degenerate geometry gives an infinite bound") {
  CHECK(std::isinf(crlb_from_fim(0.0)));
  CHECK(std::isinf(crlb_from_fim(-1.0)));
  CHECK_THROWS_AS(crlb_fd(ArrayConfig::fully_digital(4), 95.0, 0.0, 1), DomainError);
}

TEST_CASE("quantized bound applies the loss factor") {
  const double ideal = crlb_fd(ArrayConfig::fully_digital(32), 10.0, 0.0, 1);
  CHECK(rel(crlb_quantized(ideal, Bits(3), 0.0), ideal * performance_loss_factor(Bits(3), 0.0)) < 1e-15);
  CHECK(crlb_quantized(ideal, Bits::infinite(), 0.0) == ideal);
  CrlbReport r;
  r.crlb_rad2 = 1.0;
  CHECK(rel(r.crlb_deg2(), std::pow(180.0 / std::numbers::pi, 2)) < 1e-15);
}

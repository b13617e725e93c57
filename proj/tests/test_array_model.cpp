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

#include "doalab/array_model.hpp"
#include "doalab/errors.hpp"

using namespace doalab;

TEST_CASE("steering vector phases advance by 2 pi d u") {
  const auto a = steering_vector(8, 0.5, 0.3);
  for (int p = 0; p < 8; ++p) {
    CHECK(std::abs(std::abs(a(p)) - 1.0) < 1e-15);
    const cplx want = std::exp(cplx(0.0, kTwoPi * 0.5 * p * 0.3));
    CHECK(std::abs(a(p) - want) < 1e-13);
  }
  CHECK_THROWS_AS(steering_vector(4, 0.5, 1.2), DomainError);
}

TEST_CASE("subarray gain peaks at the steered direction") {
  const double m = 4;
  CHECK(std::abs(std::abs(subarray_gain(4, 0.5, 0.2, 0.2)) - std::sqrt(m)) < 1e-12);
  // closed form |sin(pi M d du) / sin(pi d du)| / sqrt(M)
  for (double du : {0.05, 0.3, 0.7}) {
    const double want = std::abs(std::sin(std::numbers::pi * m * 0.5 * du) / std::sin(std::numbers::pi * 0.5 * du)) / std::sqrt(m);
    CHECK(std::abs(std::abs(subarray_gain(4, 0.5, du, 0.0)) - want) < 1e-12);
  }
  // exact null one lattice step away
  CHECK(std::abs(subarray_gain(4, 0.5, 0.5, 0.0)) < 1e-12);
}

TEST_CASE("array layouts") {
  const auto fd = ArrayConfig::fully_digital(16);
  CHECK(fd.n_fd == 16);
  CHECK(fd.fd_proportion() == 1.0);
  const auto h = ArrayConfig::hybrid(16, 4);
  CHECK(h.n_total == 64);
  CHECK(h.hybrid_antennas() == 64);
  CHECK_THROWS_AS((ArrayConfig{10, 4, 2, 1, 0.5}.validate()), ContractError);

  auto l = layout_for_proportion(64, 4, 0.25);
  CHECK(l.config.n_fd == 16);
  CHECK(l.config.k_sub == 12);
  CHECK_FALSE(l.rounded);
  l = layout_for_proportion(64, 4, 0.0625);
  CHECK(l.config.n_fd == 4);
  CHECK(l.config.k_sub == 15);
  l = layout_for_proportion(64, 4, 0.1);  // 6.4 -> 6 -> 4
  CHECK(l.config.n_fd == 4);
  CHECK(l.rounded);
  l = layout_for_proportion(64, 4, 1.0);
  CHECK(l.config.k_sub == 0);
}

TEST_CASE("synthesized snapshots carry the requested powers") {
  const auto cfg = ArrayConfig::fully_digital(8);
  auto scen = EmitterScenario::single(20.0, 3.0, 4000, 2.0);
  Philox4x32 rng(1, 2);
  const auto b = synthesize_snapshots(cfg, scen, rng);
  REQUIRE(b.channels() == 8);
  REQUIRE(b.snapshots() == 4000);
  CHECK(b.stage == Stage::kElement);
  CHECK(b.all_finite());
  // per-element power is P + sigma^2
  const double p = 2.0 * std::pow(10.0, 0.3);
  const double power = b.samples.squaredNorm() / b.samples.size();
  CHECK(std::abs(power - (p + 2.0)) < 0.05 * (p + 2.0));

  // noise only: zero mean, circular, right variance
  const auto n = synthesize_snapshots(cfg, EmitterScenario::noise_only(20000, 0.5), rng);
  const cplx mean = n.samples.mean();
  CHECK(std::abs(mean) < 0.01);
  double re2 = 0.0, im2 = 0.0;
  for (Eigen::Index i = 0; i < n.samples.size(); ++i) {
    re2 += std::norm(n.samples(i).real());
    im2 += std::norm(n.samples(i).imag());
  }
  re2 /= n.samples.size();
  im2 /= n.samples.size();
  CHECK(std::abs(re2 - 0.25) < 0.005);
  CHECK(std::abs(im2 - 0.25) < 0.005);
}

TEST_CASE("synthesis is a pure function of the stream") {
  const auto cfg = ArrayConfig::fully_digital(4);
  const auto scen = EmitterScenario::single(-10.0, 0.0, 5);
  Philox4x32 a(9, 1), b(9, 1);
  CHECK(synthesize_snapshots(cfg, scen, a).samples == synthesize_snapshots(cfg, scen, b).samples);
}

TEST_CASE("analog combining applies w^H per subarray and passes FD rows through") {
  const auto cfg = ArrayConfig::two_layer(2, 3, 2);
  const auto scen = EmitterScenario::single(15.0, 10.0, 3);
  Philox4x32 rng(4, 4);
  const auto el = synthesize_snapshots(cfg, scen, rng);
  const auto w = AnalogWeights::steered(3, 0.5, 0.1);
  const auto out = analog_combine(el, cfg, w);
  REQUIRE(out.channels() == 4);
  CHECK(out.stage == Stage::kAnalogCombined);
  for (int t = 0; t < 3; ++t) {
    for (int k = 0; k < 2; ++k) {
      const cplx want = w.weights().dot(el.samples.block(3 * k, t, 3, 1).col(0));
      CHECK(std::abs(out.samples(k, t) - want) < 1e-13);
    }
    CHECK(out.samples(2, t) == el.samples(6, t));
    CHECK(out.samples(3, t) == el.samples(7, t));
  }
  CHECK(out.channel_map[0].kind == ChannelSource::Kind::kSubarray);
  CHECK(out.channel_map[3].kind == ChannelSource::Kind::kElement);
  CHECK(out.channel_map[3].index == 7);
  CHECK_THROWS_AS(analog_combine(out, cfg, w), ContractError);
}

TEST_CASE("noiseless combined output follows the subarray gain") {
  auto cfg = ArrayConfig::hybrid(4, 4);
  const double u = 0.3;
  const auto a = steering_vector(16, 0.5, u);
  SnapshotBatch b;
  b.samples = a;
  b.channel_map.resize(16);
  for (int i = 0; i < 16; ++i) b.channel_map[i] = {ChannelSource::Kind::kElement, i};
  const auto out = analog_combine(b, cfg, AnalogWeights::steered(4, 0.5, 0.0));
  const cplx g = subarray_gain(4, 0.5, u, 0.0);
  for (int k = 0; k < 4; ++k) {
    const cplx want = g * std::exp(cplx(0.0, kTwoPi * 0.5 * 4 * k * u));
    CHECK(std::abs(out.samples(k, 0) - want) < 1e-12);
  }
}

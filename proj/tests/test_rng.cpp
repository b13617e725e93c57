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

#include <cstdlib>
#include <set>

#include "doalab/rng.hpp"

using doalab::Philox4x32;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // reference values from the Random123 distribution
  const auto zero = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                          {0xffffffffu, 0xffffffffu});
  CHECK(ones == Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const auto pi = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                        {0xa4093822u, 0x299f31d0u});
  CHECK(pi == Philox4x32::Block{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox4x32 a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  CHECK(seen.size() == 300);
}

TEST_CASE("stream ids separate trials and purposes") {
  using doalab::StreamPurpose;
  CHECK(doalab::stream_id(0, StreamPurpose::kNullHypothesis) != doalab::stream_id(0, StreamPurpose::kSignalHypothesis));
  CHECK(doalab::stream_id(1, StreamPurpose::kGeneric) == 256);
  auto r1 = doalab::trial_stream(5, 3, StreamPurpose::kTraining);
  Philox4x32 r2(5, doalab::stream_id(3, StreamPurpose::kTraining));
  CHECK(r1() == r2());
}

TEST_CASE("output words are roughly uniform") {
  Philox4x32 r(1, 0);
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ones += static_cast<int>(r() >> 63);
  CHECK(std::abs(ones - n / 2) < 4 * 71);  // 4 sigma
}

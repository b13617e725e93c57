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

#include <array>
#include <cstdint>
#include <limits>

namespace doalab {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit master seed is the key; the 128-bit counter is split into a
// 64-bit block index and a 64-bit stream id. Every Monte Carlo trial draws
// from its own stream, so results do not depend on how trials are scheduled.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  // The bare bijection; exposed for known-answer tests.
  static Block bijection(Block counter, Key key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;  // 64-bit words consumed from buffer_ (0, 1 or 2), 4 = empty
};

// Purposes keep independent draws of one trial apart (e.g. the H0 and H1
// batches of a paired detection trial).
enum class StreamPurpose : std::uint64_t {
  kGeneric = 0,
  kNullHypothesis = 1,
  kSignalHypothesis = 2,
  kEstimation = 3,
  kTraining = 4,
  kValidation = 5,
  kCalibration = 6,
  kShuffle = 7,
  kInit = 8,
  kHoldout = 9,
};

inline constexpr std::uint64_t stream_id(std::uint64_t trial, StreamPurpose purpose) {
  return (trial << 8) | static_cast<std::uint64_t>(purpose);
}

inline Philox4x32 trial_stream(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose) {
  return Philox4x32(seed, stream_id(trial, purpose));
}

}  // namespace doalab

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
#include <vector>

#include "doalab/array_model.hpp"
#include "doalab/rng.hpp"

namespace doalab {

// Directions consistent with an ambiguous inter-subarray phase measurement.
struct CandidateSet {
  double base = 0.0;              // the ambiguous estimate
  std::vector<double> candidates; // ascending, in [-1, 1)
  double period = 0.0;            // 1 / (M d)

  int size() const { return static_cast<int>(candidates.size()); }
};

CandidateSet candidate_set(double u_hat, int m_sub, double spacing);

struct DoaEstimate {
  double u = 0.0;
  double degrees = 0.0;
  std::string method;
  int snapshots_consumed = 0;
  double crlb_rad2 = 0.0;
  std::optional<CandidateSet> candidates;
  bool clamped = false;  // a sub-estimate left [-1, 1] and was clamped
};

struct Combined {
  double u = 0.0;
  double variance = 0.0;
};

// Inverse-variance weighting. An infinite bound contributes no weight.
Combined combine_estimates(double u_a, double crlb_a, double u_b, double crlb_b);

// Snapshot 1 through broadside beams yields the candidate set; each later
// snapshot steers every subarray at one candidate and the strongest wins.
// Consumes 1 + |candidates| snapshots (M + 1 at half-wavelength spacing).
DoaEstimate had_root_music_classic(const SnapshotBatch& elements, const ArrayConfig& cfg, double snr_db);

// Snapshot 2 splits the subarrays into one contiguous subgroup per candidate,
// remainder subarrays dealt round-robin; the subgroup with the highest
// per-subarray power wins. Consumes 2 snapshots.
DoaEstimate fhad_root_music(const SnapshotBatch& elements, const ArrayConfig& cfg, double snr_db);

// One-shot two-layer estimate from the first `snapshots` columns: the FD block
// picks the HAD candidate and the two are combined by their bounds. A
// configuration without subarrays degenerates to FD Root-MUSIC.
DoaEstimate tlhad_estimate(const SnapshotBatch& elements, const ArrayConfig& cfg, double snr_db,
                           int snapshots = 1);

// Root-MUSIC over all channels of a batch treated as a ULA with `spacing`.
DoaEstimate fd_root_music(const SnapshotBatch& batch, double spacing, double snr_db);

// Convenience forms that synthesize exactly the snapshots each method needs.
DoaEstimate had_root_music_classic(const ArrayConfig& cfg, const EmitterScenario& scen, Philox4x32& rng);
DoaEstimate fhad_root_music(const ArrayConfig& cfg, const EmitterScenario& scen, Philox4x32& rng);
DoaEstimate tlhad_estimate(const ArrayConfig& cfg, const EmitterScenario& scen, Philox4x32& rng);

// Subgroup index of every subarray for the FHAD test snapshot.
std::vector<int> fhad_subgroups(int k_sub, int n_groups);

// Candidate nearest to u_ref in direction sine; exact ties go to the smaller |u|.
double nearest_candidate(const CandidateSet& set, double u_ref);

}  // namespace doalab

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

#include <span>
#include <vector>

#include "doalab/array_model.hpp"

namespace doalab {

struct CovarianceEstimate {
  CMatrix matrix;                // P x P Hermitian
  Eigen::VectorXd eigenvalues;   // descending
  CMatrix eigenvectors;          // columns match eigenvalues; empty if not requested
  int n_snapshots = 0;

  int size() const { return static_cast<int>(matrix.rows()); }
  bool has_eigenvectors() const { return eigenvectors.size() > 0; }
};

enum class EigenMode { kValuesOnly, kFull };

// Sorted descending; each eigenvector's largest-magnitude entry is made real
// and positive so the decomposition is deterministic.
CovarianceEstimate decompose(CMatrix matrix, int n_snapshots, EigenMode mode = EigenMode::kFull);

// R = (1/L) sum_t x(t) x(t)^H.
CovarianceEstimate sample_covariance(const SnapshotBatch& batch, EigenMode mode = EigenMode::kFull);

// Roots of sum_k coeffs[k] z^k (ascending powers). Leading coefficients that are
// negligible relative to the largest are dropped. Aberth-Ehrlich iteration, with
// companion_roots as fallback when it stalls.
std::vector<cplx> polynomial_roots(std::span<const cplx> coeffs);

// Same, via companion-matrix eigenvalues. O(n^3); kept as reference.
std::vector<cplx> companion_roots(std::span<const cplx> coeffs);

// Coefficients (ascending powers, degree 2(P-1)) of z^(P-1) a(1/z)^T C a(z)
// with C the noise-subspace projector of the n_sources-dimensional signal space.
std::vector<cplx> root_music_polynomial(const CovarianceEstimate& cov, int n_sources);

struct RootMusicResult {
  std::vector<double> sines;       // principal-interval direction sines, closest root first
  std::vector<cplx> selected;      // the chosen roots (inside or on the unit circle)
  std::vector<cplx> all_roots;
};

// Direction sines in [-1/(2d), 1/(2d)). With spacing > 1/2 these are ambiguous.
RootMusicResult root_music_detailed(const CovarianceEstimate& cov, int n_sources, double spacing);
std::vector<double> root_music(const CovarianceEstimate& cov, int n_sources, double spacing);

// Maps an arbitrary sine-like phase value into the principal interval.
double wrap_principal(double u, double spacing);

}  // namespace doalab

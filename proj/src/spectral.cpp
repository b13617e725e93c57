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

#include "doalab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "doalab/errors.hpp"
#include "doalab/kernels.hpp"

namespace doalab {

CovarianceEstimate decompose(CMatrix matrix, int n_snapshots, EigenMode mode) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    throw ContractError("covariance must be a non-empty square matrix");
  CovarianceEstimate out;
  out.n_snapshots = n_snapshots;
  const Eigen::Index p = matrix.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(
      matrix, mode == EigenMode::kFull ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalFailure("Hermitian eigendecomposition failed");
  // Eigen returns ascending order.
  out.eigenvalues = solver.eigenvalues().reverse();
  if (mode == EigenMode::kFull) {
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();
    for (Eigen::Index c = 0; c < p; ++c) {
      auto v = out.eigenvectors.col(c);
      Eigen::Index arg = 0;
      v.cwiseAbs2().maxCoeff(&arg);
      const cplx pivot = v[arg];
      if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
    }
  }
  out.matrix = std::move(matrix);
  return out;
}

CovarianceEstimate sample_covariance(const SnapshotBatch& batch, EigenMode mode) {
  if (batch.snapshots() < 1) throw ContractError("sample covariance needs at least one snapshot");
  const auto p = static_cast<std::size_t>(batch.channels());
  const auto len = static_cast<std::size_t>(batch.snapshots());
  CMatrix r = CMatrix::Zero(batch.channels(), batch.channels());
  kernels::active().hermitian_rank_update({batch.samples.data(), p * len}, p, len,
                                          {r.data(), p * p});
  r /= static_cast<double>(len);
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    r(j, j) = r(j, j).real();
    for (Eigen::Index i = j + 1; i < r.rows(); ++i) r(j, i) = std::conj(r(i, j));
  }
  return decompose(std::move(r), batch.snapshots(), mode);
}

namespace {

// Degree after dropping leading coefficients that vanish relative to the largest.
std::size_t effective_degree(std::span<const cplx> coeffs) {
  double biggest = 0.0;
  for (const cplx& c : coeffs) biggest = std::max(biggest, std::abs(c));
  if (biggest == 0.0) throw NumericalFailure("zero polynomial has no isolated roots");
  std::size_t degree = coeffs.size() - 1;
  while (degree > 0 && std::abs(coeffs[degree]) <= 1e-14 * biggest) --degree;
  return degree;
}

// Newton correction p(z)/p'(z), plus whether |p(z)| is already at rounding level.
// Outside the unit disc the reversed polynomial is evaluated in 1/z to avoid
// overflow and to keep Horner backward stable.
struct Correction {
  cplx step;
  bool settled;
};

Correction newton_step(std::span<const cplx> a, cplx z) {
  const std::size_t n = a.size() - 1;
  constexpr double kEps = 2.220446049250313e-16;
  const bool outside = std::abs(z) > 1.0;
  const cplx y = outside ? 1.0 / z : z;
  const double ay = std::abs(y);
  cplx p = 0.0, dp = 0.0;
  double bound = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const cplx c = outside ? a[k] : a[n - k];
    dp = dp * y + p;
    p = p * y + c;
    bound = bound * ay + std::abs(c);
  }
  const bool settled = std::abs(p) <= 4.0 * kEps * (static_cast<double>(n) + 1.0) * bound;
  if (p == 0.0) return {0.0, true};
  if (!outside) return {p / dp, settled};
  // p(z) = z^n q(1/z), so p'/p = n/z - q'(y) y^2 / q(y).
  const cplx log_deriv = static_cast<double>(n) * y - dp * y * y / p;
  return {1.0 / log_deriv, settled};
}

// Aberth-Ehrlich simultaneous iteration; O(n^2) per sweep.
bool aberth(std::span<const cplx> a, std::vector<cplx>& z) {
  const std::size_t n = a.size() - 1;
  constexpr int kMaxSweeps = 200;
  // Start on a circle whose radius matches the geometric mean of the root moduli.
  const double radius = std::pow(std::abs(a[0]) / std::abs(a[n]), 1.0 / static_cast<double>(n));
  const double r0 = radius > 0.0 && std::isfinite(radius) ? radius : 1.0;
  z.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = std::polar(r0, kTwoPi * (static_cast<double>(i) + 0.25) / static_cast<double>(n) + 0.4);
  std::vector<bool> done(n, false);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      const auto [ratio, settled] = newton_step(a, z[i]);
      if (settled) {
        done[i] = true;
        continue;
      }
      all = false;
      cplx repel = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) repel += 1.0 / (z[i] - z[j]);
      const cplx step = ratio / (1.0 - ratio * repel);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
      z[i] -= step;
      if (std::abs(step) <= 1e-15 * std::abs(z[i])) done[i] = true;
    }
    if (all) return true;
  }
  return false;
}

struct Derivatives {
  cplx p, d1, d2;
};

Derivatives evaluate(std::span<const cplx> a, cplx z) {
  Derivatives v{0.0, 0.0, 0.0};
  for (std::size_t k = a.size(); k-- > 0;) {
    v.d2 = v.d2 * z + 2.0 * v.d1;
    v.d1 = v.d1 * z + v.p;
    v.p = v.p * z + a[k];
  }
  return v;
}

// Iteration leaves each member of a near-double root about sqrt(eps) off, and
// not symmetrically. Refine the cluster centre as a simple root of p' and split
// it by the local quadratic model.
void polish_pairs(std::span<const cplx> a, std::vector<cplx>& z) {
  constexpr double kCluster = 1e-5;
  std::vector<bool> seen(z.size(), false);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (seen[i]) continue;
    std::size_t partner = z.size();
    for (std::size_t j = i + 1; j < z.size(); ++j)
      if (!seen[j] && std::abs(z[i] - z[j]) < kCluster * std::max(1.0, std::abs(z[i]))) {
        if (partner != z.size()) {  // three or more: leave alone
          partner = z.size();
          break;
        }
        partner = j;
      }
    if (partner == z.size()) continue;
    seen[i] = seen[partner] = true;
    cplx c = 0.5 * (z[i] + z[partner]);
    for (int it = 0; it < 8; ++it) {
      const auto v = evaluate(a, c);
      if (v.d2 == 0.0) break;
      const cplx step = v.d1 / v.d2;
      c -= step;
      if (std::abs(step) <= 1e-16 * std::abs(c)) break;
    }
    const auto v = evaluate(a, c);
    if (v.d2 == 0.0) continue;
    const cplx half = std::sqrt(-2.0 * v.p / v.d2);
    if (!(std::abs(half) < kCluster * std::max(1.0, std::abs(c)))) continue;
    // Keep each member on the side it was found.
    const bool flip = std::abs(z[i] - (c + half)) > std::abs(z[i] - (c - half));
    z[i] = flip ? c - half : c + half;
    z[partner] = flip ? c + half : c - half;
  }
}

}  // namespace

std::vector<cplx> companion_roots(std::span<const cplx> coeffs) {
  const std::size_t degree = effective_degree(coeffs);
  if (degree == 0) return {};
  // Zero roots from vanishing trailing coefficients are kept: they are genuine.
  const auto n = static_cast<Eigen::Index>(degree);
  CMatrix companion = CMatrix::Zero(n, n);
  const cplx lead = coeffs[degree];
  for (Eigen::Index i = 0; i < n; ++i) companion(0, i) = -coeffs[degree - 1 - static_cast<std::size_t>(i)] / lead;
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalFailure("companion eigenvalue iteration failed");
  return {solver.eigenvalues().data(), solver.eigenvalues().data() + n};
}

std::vector<cplx> polynomial_roots(std::span<const cplx> coeffs) {
  const std::size_t degree = effective_degree(coeffs);
  if (degree == 0) return {};
  // Peel exact zero roots first; Aberth needs a nonzero constant term.
  std::size_t zeros = 0;
  while (zeros < degree && coeffs[zeros] == 0.0) ++zeros;
  std::vector<cplx> roots(zeros, 0.0);
  if (zeros == degree) return roots;
  const auto trimmed = coeffs.subspan(zeros, degree - zeros + 1);
  if (trimmed.size() <= 3) return companion_roots(coeffs);
  std::vector<cplx> z;
  if (!aberth(trimmed, z)) return companion_roots(coeffs);
  polish_pairs(trimmed, z);
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

std::vector<cplx> root_music_polynomial(const CovarianceEstimate& cov, int n_sources) {
  const int p = cov.size();
  if (n_sources < 1 || n_sources >= p)
    throw ContractError(fmt::format("root-MUSIC needs 1 <= sources < P (got {} of {})", n_sources, p));
  if (!cov.has_eigenvectors()) throw ContractError("root-MUSIC needs eigenvectors");
  const auto signal = cov.eigenvectors.leftCols(n_sources);
  const CMatrix projector = CMatrix::Identity(p, p) - signal * signal.adjoint();
  // a(z)^H C a(z) on |z| = 1 collects C(i, j) into the power z^(j - i).
  std::vector<cplx> coeffs(static_cast<std::size_t>(2 * p - 1), 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) coeffs[static_cast<std::size_t>(j - i + p - 1)] += projector(i, j);
  return coeffs;
}

double wrap_principal(double u, double spacing) {
  const double period = 1.0 / spacing;
  double w = u - period * std::floor(u / period + 0.5);
  if (w >= 0.5 * period) w -= period;
  if (w < -0.5 * period) w += period;
  return w;
}

namespace {

struct RootGroup {
  cplx inner;       // the member inside (or on) the unit circle
  double phase;     // phase of the group centroid
  double distance;  // distance of `inner` from the unit circle
};

// Root-MUSIC roots come in pairs (z, 1/conj(z)). On noiseless data a pair
// collapses onto the unit circle as a double root, whose individual members
// the companion solver resolves only to ~sqrt(eps); the pair centroid is
// well conditioned, so the phase is taken from it.
std::vector<RootGroup> pair_roots(const std::vector<cplx>& roots) {
  constexpr double kPairTolerance = 1e-4;
  std::vector<std::size_t> order(roots.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(std::abs(roots[a]) - 1.0) < std::abs(std::abs(roots[b]) - 1.0);
  });
  std::vector<bool> used(roots.size(), false);
  std::vector<RootGroup> groups;
  for (std::size_t idx : order) {
    if (used[idx]) continue;
    used[idx] = true;
    const cplx z = roots[idx];
    if (std::abs(z) == 0.0) continue;
    const cplx mirror = 1.0 / std::conj(z);
    std::size_t best = roots.size();
    double best_dist = kPairTolerance * std::max(1.0, std::abs(mirror));
    for (std::size_t k = 0; k < roots.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(roots[k] - mirror);
      if (d < best_dist) {
        best_dist = d;
        best = k;
      }
    }
    RootGroup g;
    if (best < roots.size()) {
      used[best] = true;
      const cplx w = roots[best];
      g.inner = std::abs(z) <= std::abs(w) ? z : w;
      g.phase = std::arg(z + w);
    } else {
      g.inner = z;
      g.phase = std::arg(z);
      if (std::abs(z) > 1.0) continue;  // an unpaired root outside carries no estimate
    }
    g.distance = std::abs(std::abs(g.inner) - 1.0);
    groups.push_back(g);
  }
  return groups;
}

}  // namespace

RootMusicResult root_music_detailed(const CovarianceEstimate& cov, int n_sources, double spacing) {
  if (!(spacing > 0.0)) throw ContractError("root-MUSIC needs positive spacing");
  const auto coeffs = root_music_polynomial(cov, n_sources);
  RootMusicResult out;
  out.all_roots = polynomial_roots(coeffs);
  auto groups = pair_roots(out.all_roots);
  std::stable_sort(groups.begin(), groups.end(), [](const RootGroup& a, const RootGroup& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return std::abs(a.phase) < std::abs(b.phase);
  });
  if (static_cast<int>(groups.size()) < n_sources)
    throw EstimationFailure(fmt::format("root-MUSIC found {} usable roots for {} sources",
                                        groups.size(), n_sources));
  for (int s = 0; s < n_sources; ++s) {
    const RootGroup& g = groups[static_cast<std::size_t>(s)];
    out.selected.push_back(g.inner);
    out.sines.push_back(wrap_principal(g.phase / (kTwoPi * spacing), spacing));
  }
  return out;
}

std::vector<double> root_music(const CovarianceEstimate& cov, int n_sources, double spacing) {
  return root_music_detailed(cov, n_sources, spacing).sines;
}

}  // namespace doalab

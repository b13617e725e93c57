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
#include <random>
#include <vector>

#include "doalab/adc_quant.hpp"
#include "doalab/kernels.hpp"

using doalab::kernels::cplx;
using doalab::kernels::KernelTable;

namespace {

std::vector<cplx> random_cplx(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(gen), g(gen)};
  return v;
}

std::vector<double> random_real(std::size_t n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(gen);
  return v;
}

const KernelTable* simd() {
  const KernelTable* t = doalab::kernels::avx2_kernels();
  if (!t) MESSAGE("AVX2 unavailable on this host; equivalence cases are skipped");
  return t;
}

}  // namespace

TEST_CASE("rank update matches a naive triple loop") {
  std::mt19937_64 gen(7);
  const auto& s = doalab::kernels::scalar_kernels();
  for (std::size_t rows : {1u, 2u, 3u, 5u, 8u}) {
    for (std::size_t cols : {1u, 4u, 9u}) {
      const auto x = random_cplx(rows * cols, gen);
      std::vector<cplx> r(rows * rows, cplx{0.5, 0.0});
      s.hermitian_rank_update(x, rows, cols, r);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          cplx want{0.5, 0.0};
          for (std::size_t t = 0; t < cols; ++t) want += x[t * rows + i] * std::conj(x[t * rows + j]);
          CHECK(std::abs(r[j * rows + i] - want) < 1e-12 * (1.0 + std::abs(want)));
        }
    }
  }
}

TEST_CASE("scalar and AVX2 rank updates agree") {
  const KernelTable* v = simd();
  if (!v) return;
  std::mt19937_64 gen(11);
  const auto& s = doalab::kernels::scalar_kernels();
  for (std::size_t rows : {1u, 2u, 3u, 7u, 16u, 33u, 64u}) {
    for (std::size_t cols : {1u, 3u, 200u}) {
      const auto x = random_cplx(rows * cols, gen);
      std::vector<cplx> a(rows * rows), b(rows * rows);
      s.hermitian_rank_update(x, rows, cols, a);
      v->hermitian_rank_update(x, rows, cols, b);
      double worst = 0.0;
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          worst = std::max(worst, std::abs(a[j * rows + i] - b[j * rows + i]) / (1.0 + std::abs(a[j * rows + i])));
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("scalar and AVX2 affine maps agree") {
  const KernelTable* v = simd();
  if (!v) return;
  std::mt19937_64 gen(3);
  const auto& s = doalab::kernels::scalar_kernels();
  for (std::size_t in : {1u, 3u, 4u, 5u, 8u, 17u, 64u}) {
    for (std::size_t out : {1u, 2u, 9u}) {
      const auto w = random_real(in * out, gen), x = random_real(in, gen), b = random_real(out, gen);
      std::vector<double> ya(out), yb(out);
      s.affine(w, x, b, ya);
      v->affine(w, x, b, yb);
      for (std::size_t k = 0; k < out; ++k) CHECK(std::abs(ya[k] - yb[k]) < 1e-12 * (1.0 + std::abs(ya[k])));
    }
  }
}

TEST_CASE("scalar and AVX2 energy sums agree") {
  const KernelTable* v = simd();
  if (!v) return;
  std::mt19937_64 gen(5);
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 31u, 1000u}) {
    const auto x = random_cplx(n, gen);
    const double a = doalab::kernels::scalar_kernels().sum_abs2(x);
    const double b = v->sum_abs2(x);
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + a));
  }
}

TEST_CASE("scalar and AVX2 quantizers are bit-identical") {
  const KernelTable* v = simd();
  if (!v) return;
  std::mt19937_64 gen(9);
  const auto& s = doalab::kernels::scalar_kernels();
  for (int bits = 1; bits <= 6; ++bits) {
    const auto& cb = doalab::lloyd_max_codebook(bits);
    auto in = random_real(1001, gen, 1.7);
    // samples sitting exactly on decision boundaries
    for (std::size_t k = 0; k < cb.thresholds.size(); ++k) in[k] = cb.thresholds[k] * 0.8;
    std::vector<double> a(in.size()), b(in.size());
    s.quantize(in, 0.8, cb.thresholds, cb.levels, a);
    v->quantize(in, 0.8, cb.thresholds, cb.levels, b);
    CHECK(a == b);
  }
}

TEST_CASE("kernel selection honours requests") {
  CHECK(doalab::kernels::select("scalar"));
  CHECK(doalab::kernels::active().name == "scalar");
  CHECK_FALSE(doalab::kernels::select("neon-please"));
  CHECK(doalab::kernels::select("auto"));
  if (doalab::kernels::avx2_kernels()) CHECK(doalab::kernels::active().name == "avx2");
}

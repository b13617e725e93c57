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

#include <immintrin.h>

#include <algorithm>
#include <cstdint>

#include "kernel_impl.hpp"

namespace doalab::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void hermitian_rank_update(std::span<const cplx> x, std::size_t rows, std::size_t cols,
                           std::span<cplx> r) {
  const double* xd = reinterpret_cast<const double*>(x.data());
  double* rd = reinterpret_cast<double*>(r.data());
  for (std::size_t t = 0; t < cols; ++t) {
    const double* col = xd + 2 * t * rows;
    for (std::size_t j = 0; j < rows; ++j) {
      const double cr = col[2 * j];
      const double ci = -col[2 * j + 1];
      const __m256d vcr = _mm256_set1_pd(cr);
      const __m256d vci = _mm256_set1_pd(ci);
      double* rcol = rd + 2 * j * rows;
      std::size_t i = j;
      // Two complex entries per register: [a0 b0 a1 b1].
      for (; i + 2 <= rows; i += 2) {
        const __m256d vx = _mm256_loadu_pd(col + 2 * i);
        const __m256d swapped = _mm256_permute_pd(vx, 0b0101);
        const __m256d cross = _mm256_mul_pd(swapped, vci);
        const __m256d prod = _mm256_fmaddsub_pd(vx, vcr, cross);
        _mm256_storeu_pd(rcol + 2 * i, _mm256_add_pd(_mm256_loadu_pd(rcol + 2 * i), prod));
      }
      for (; i < rows; ++i) {
        const double a = col[2 * i];
        const double b = col[2 * i + 1];
        rcol[2 * i] += a * cr - b * ci;
        rcol[2 * i + 1] += b * cr + a * ci;
      }
    }
  }
}

void affine(std::span<const double> w, std::span<const double> x, std::span<const double> b,
            std::span<double> y) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < y.size(); ++o) {
    const double* row = w.data() + o * in;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= in; i += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(x.data() + i), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i + 4), _mm256_loadu_pd(x.data() + i + 4), acc1);
    }
    for (; i + 4 <= in; i += 4)
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(x.data() + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc + b[o];
  }
}

double sum_abs2(std::span<const cplx> x) {
  const double* d = reinterpret_cast<const double*>(x.data());
  const std::size_t n = 2 * x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(d + i);
    const __m256d b = _mm256_loadu_pd(d + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += d[i] * d[i];
  return acc;
}

// Counting compares is only worthwhile for small codebooks.
constexpr std::size_t kMaxVectorThresholds = 32;

void quantize(std::span<const double> in, double scale, std::span<const double> thresholds,
              std::span<const double> levels, std::span<double> out) {
  const double inv = 1.0 / scale;
  std::size_t i = 0;
  if (thresholds.size() <= kMaxVectorThresholds) {
    const __m256d vinv = _mm256_set1_pd(inv);
    const __m256d vscale = _mm256_set1_pd(scale);
    for (; i + 4 <= in.size(); i += 4) {
      const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(in.data() + i), vinv);
      __m256i count = _mm256_setzero_si256();
      for (double t : thresholds) {
        const __m256d gt = _mm256_cmp_pd(v, _mm256_set1_pd(t), _CMP_GT_OQ);
        count = _mm256_sub_epi64(count, _mm256_castpd_si256(gt));
      }
      const __m256d q = _mm256_i64gather_pd(levels.data(), count, 8);
      _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(q, vscale));
    }
  }
  for (; i < in.size(); ++i) {
    const double v = in[i] * inv;
    const auto idx = std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin();
    out[i] = levels[static_cast<std::size_t>(idx)] * scale;
  }
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{"avx2", &hermitian_rank_update, &affine, &sum_abs2, &quantize};
}  // namespace detail

}  // namespace doalab::kernels

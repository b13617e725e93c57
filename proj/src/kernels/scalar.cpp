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

#include <algorithm>

#include "kernel_impl.hpp"

namespace doalab::kernels {
namespace {

void hermitian_rank_update(std::span<const cplx> x, std::size_t rows, std::size_t cols,
                           std::span<cplx> r) {
  const double* xd = reinterpret_cast<const double*>(x.data());
  double* rd = reinterpret_cast<double*>(r.data());
  for (std::size_t t = 0; t < cols; ++t) {
    const double* col = xd + 2 * t * rows;
    for (std::size_t j = 0; j < rows; ++j) {
      // c = conj(x_j)
      const double cr = col[2 * j];
      const double ci = -col[2 * j + 1];
      double* rcol = rd + 2 * j * rows;
      for (std::size_t i = j; i < rows; ++i) {
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
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc + b[o];
  }
}

double sum_abs2(std::span<const cplx> x) {
  double acc = 0.0;
  for (const cplx& v : x) acc += v.real() * v.real() + v.imag() * v.imag();
  return acc;
}

void quantize(std::span<const double> in, double scale, std::span<const double> thresholds,
              std::span<const double> levels, std::span<double> out) {
  const double inv = 1.0 / scale;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i] * inv;
    const auto idx = std::lower_bound(thresholds.begin(), thresholds.end(), v) - thresholds.begin();
    out[i] = levels[static_cast<std::size_t>(idx)] * scale;
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{"scalar", &hermitian_rank_update, &affine, &sum_abs2, &quantize};
}  // namespace detail

}  // namespace doalab::kernels

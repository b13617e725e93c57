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

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2/FMA variant chosen once at startup. Both variants are kept callable so
// tests can check them against each other.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace doalab::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;

  // r += sum_t x_t x_t^H over the columns of the column-major rows x cols
  // matrix x. Only the lower triangle (i >= j) of the column-major rows x rows
  // matrix r is touched.
  void (*hermitian_rank_update)(std::span<const cplx> x, std::size_t rows, std::size_t cols,
                                std::span<cplx> r);

  // y = W x + b with W row-major (out x in).
  void (*affine)(std::span<const double> w, std::span<const double> x, std::span<const double> b,
                 std::span<double> y);

  double (*sum_abs2)(std::span<const cplx> x);

  // out[i] = levels[#{k : in[i] * inv_scale > thresholds[k]}] * scale.
  // thresholds ascending, levels.size() == thresholds.size() + 1.
  void (*quantize)(std::span<const double> in, double scale, std::span<const double> thresholds,
                   std::span<const double> levels, std::span<double> out);
};

const KernelTable& scalar_kernels();

// nullptr unless built with AVX2 support and the running CPU has AVX2 + FMA.
const KernelTable* avx2_kernels();

// The table every library routine uses. Defaults to the widest supported
// variant; DOALAB_KERNELS=scalar in the environment pins the reference path.
const KernelTable& active();

// "scalar", "avx2" or "auto". Returns false if the request cannot be honoured.
bool select(std::string_view name);

}  // namespace doalab::kernels

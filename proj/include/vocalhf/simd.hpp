// Copyright 2026 The vocalhf Authors
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

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference and, where
// the target supports it, an AVX2 or NEON variant. The variant is picked once
// at startup from the running CPU and can be pinned with the environment
// variable VOCALHF_SIMD=scalar|avx2|neon (unknown or unsupported values fall
// back to the best available one).
//
// Vector variants reassociate sums, so results agree with the scalar
// reference to rounding, not bit-for-bit. A single process always uses the
// same variant, which keeps repeated runs byte-identical.

namespace vocalhf::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

bool supported(Isa isa) noexcept;
const KernelTable& table(Isa isa);

/// Variant used by the free functions below.
Isa active() noexcept;

/// Overrides the active variant; used by equivalence tests. Not thread-safe
/// with respect to concurrent kernel calls.
void set_active(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out[k] = sum_n x[n] * x[n + k] for k in [0, out.size()).
void autocorrelation(std::span<const double> x, std::span<double> out);

/// out[n] = sum_j taps[j] * x[n - j], zero history before x[0].
/// out.size() must equal x.size().
void fir_filter(std::span<const double> taps, std::span<const double> x,
                std::span<double> out);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace vocalhf::simd

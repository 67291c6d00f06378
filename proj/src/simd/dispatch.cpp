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

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>

#include "vocalhf/error.hpp"
#include "vocalhf/simd.hpp"

namespace vocalhf::simd {
namespace {

Isa best_available() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
#if defined(__aarch64__)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("VOCALHF_SIMD");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && supported(Isa::Avx2)) return Isa::Avx2;
    if (std::strcmp(env, "neon") == 0 && supported(Isa::Neon)) return Isa::Neon;
  }
  return best_available();
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

std::atomic<const KernelTable*>& active_table_slot() {
  static std::atomic<const KernelTable*> slot{&table(active_slot().load())};
  return slot;
}

const KernelTable& current() {
  return *active_table_slot().load(std::memory_order_relaxed);
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    fail(Errc::InvalidConfig, "SIMD variant not supported on this CPU: " +
                                  std::string(to_string(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return detail::kAvx2Table;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

Isa active() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
  const KernelTable& k = table(isa);
  active_slot().store(isa, std::memory_order_relaxed);
  active_table_slot().store(&k, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  return current().dot(a.data(), b.data(), n);
}

double sum_squares(std::span<const double> a) {
  return current().sum_squares(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  current().axpy(alpha, x.data(), y.data(), n);
}

void autocorrelation(std::span<const double> x, std::span<double> out) {
  const auto& k = current();
  const std::size_t n = x.size();
  for (std::size_t lag = 0; lag < out.size(); ++lag) {
    out[lag] = lag < n ? k.dot(x.data(), x.data() + lag, n - lag) : 0.0;
  }
}

void fir_filter(std::span<const double> taps, std::span<const double> x,
                std::span<double> out) {
  if (out.size() != x.size()) {
    fail(Errc::DimensionMismatch, "fir_filter: output length must match input");
  }
  const auto& k = current();
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = x.size();
  for (std::size_t j = 0; j < taps.size() && j < n; ++j) {
    k.axpy(taps[j], x.data(), out.data() + j, n - j);
  }
}

}  // namespace vocalhf::simd

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
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

#include "vocalhf/error.hpp"
#include "vocalhf/rng.hpp"
#include "vocalhf/selection.hpp"

namespace vocalhf::selection {
namespace {

constexpr int kNeighbors = 3;

double digamma(double v) { return boost::math::digamma(v); }

// Distance from sorted[i] to its k-th nearest other element of `sorted`.
double kth_distance(std::span<const double> sorted, std::size_t i, int k) {
  std::size_t lo = i, hi = i;  // exclusive neighbours already taken: (lo, hi)
  double d = 0.0;
  for (int taken = 0; taken < k; ++taken) {
    const double left = lo > 0 ? sorted[i] - sorted[lo - 1] : INFINITY;
    const double right = hi + 1 < sorted.size() ? sorted[hi + 1] - sorted[i] : INFINITY;
    if (left <= right) {
      d = left;
      --lo;
    } else {
      d = right;
      ++hi;
    }
  }
  return d;
}

}  // namespace

double mi_score(std::span<const double> column, std::span<const int> labels, std::uint64_t jitter_seed) {
  const std::size_t n = column.size();
  if (labels.size() != n) fail(Errc::LengthMismatch, "column and labels differ in length");
  if (n < 4) fail(Errc::DegenerateInput, "mutual information needs at least 4 rows");
  std::size_t ones = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) fail(Errc::LabelOutOfRange, "labels must be 0 or 1");
    ones += static_cast<std::size_t>(l);
  }
  if (ones == 0 || ones == n) fail(Errc::DegenerateInput, "mutual information needs both classes");
  for (double v : column) {
    if (!std::isfinite(v)) fail(Errc::DegenerateInput, "mutual information needs finite values");
  }

  // Rank order by (value, label); rows equal in both are interchangeable.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return column[a] != column[b] ? column[a] < column[b] : labels[a] < labels[b];
  });
  if (column[order.front()] == column[order.back()]) return 0.0;

  // Unit-variance scaling plus rank-assigned jitter.
  double mean = 0.0;
  for (double v : column) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : column) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  std::vector<double> x(n);
  std::vector<int> y(n);
  double mean_abs = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    x[r] = column[order[r]] / sd;
    y[r] = labels[order[r]];
    mean_abs += std::abs(x[r]);
  }
  mean_abs /= static_cast<double>(n);
  Rng rng(jitter_seed);
  const double amp = 1e-10 * std::max(1.0, mean_abs);
  for (std::size_t r = 0; r < n; ++r) x[r] += amp * rng.normal();

  std::vector<std::size_t> by_value(n);
  std::iota(by_value.begin(), by_value.end(), 0);
  std::stable_sort(by_value.begin(), by_value.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  const std::array<std::size_t, 2> counts{n - ones, ones};
  std::array<std::vector<double>, 2> per_class;
  for (std::size_t r : by_value) per_class[y[r]].push_back(x[r]);
  std::vector<double> all(n);
  for (std::size_t r = 0; r < n; ++r) all[r] = x[by_value[r]];

  // Points of singleton classes are dropped, as in the reference estimator.
  std::size_t used = 0;
  double sum_k = 0.0, sum_label = 0.0, sum_m = 0.0;
  std::array<std::size_t, 2> cursor{0, 0};
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t r = by_value[q];
    const int c = y[r];
    const std::size_t pos = cursor[c]++;
    if (counts[c] < 2) continue;
    const int k = static_cast<int>(std::min<std::size_t>(kNeighbors, counts[c] - 1));
    const double radius = std::nextafter(kth_distance(per_class[c], pos, k), 0.0);
    // Distances compared directly; x ± radius would round at this scale.
    std::size_t lo = q, hi = q + 1;
    while (lo > 0 && x[r] - all[lo - 1] <= radius) --lo;
    while (hi < n && all[hi] - x[r] <= radius) ++hi;
    const auto m_all = static_cast<double>(hi - lo);
    sum_k += digamma(k);
    sum_label += digamma(static_cast<double>(counts[c]));
    sum_m += digamma(m_all);
    ++used;
  }
  if (used == 0) return 0.0;
  const double u = static_cast<double>(used);
  const double mi = digamma(u) + sum_k / u - sum_label / u - sum_m / u;
  return std::max(0.0, mi);
}

}  // namespace vocalhf::selection

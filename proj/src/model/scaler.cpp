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


#include <cmath>

#include "vocalhf/error.hpp"
#include "vocalhf/model.hpp"

namespace vocalhf::model {

Scaler Scaler::fit(const Rows& rows) {
  if (rows.size() < 2) fail(Errc::DegenerateInput, "scaler needs at least two rows");
  const std::size_t p = rows.front().size();
  Scaler s;
  s.means.assign(p, 0.0);
  s.stds.assign(p, 0.0);
  s.frozen.assign(p, false);
  const auto n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (r.size() != p) fail(Errc::DimensionMismatch, "ragged rows");
    for (std::size_t j = 0; j < p; ++j) s.means[j] += r[j];
  }
  for (double& m : s.means) m /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < p; ++j) s.stds[j] += (r[j] - s.means[j]) * (r[j] - s.means[j]);
  }
  for (std::size_t j = 0; j < p; ++j) {
    s.stds[j] = std::sqrt(s.stds[j] / n);
    // Spread at rounding level counts as none.
    if (!(s.stds[j] > 1e-12 * std::max(1.0, std::abs(s.means[j])))) {
      s.stds[j] = 1.0;
      s.frozen[j] = true;
    }
  }
  return s;
}

std::vector<double> Scaler::apply(std::span<const double> row) const {
  if (row.size() != means.size()) fail(Errc::DimensionMismatch, "row width differs from the scaler");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = frozen[j] ? 0.0 : (row[j] - means[j]) / stds[j];
  return out;
}

Rows Scaler::apply(const Rows& rows) const {
  Rows out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(apply(r));
  return out;
}

}  // namespace vocalhf::model

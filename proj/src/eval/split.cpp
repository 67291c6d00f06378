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
#include <cmath>

#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"
#include "vocalhf/rng.hpp"

namespace vocalhf::eval {
namespace {

constexpr std::uint64_t kSplitSalt = 0x3c6ef372fe94f82bULL;
constexpr std::uint64_t kFoldSalt = 0xa54ff53a5f1d36f1ULL;

std::array<std::vector<std::size_t>, 2> by_class(std::span<const int> labels) {
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) fail(Errc::LabelOutOfRange, "labels must be 0 or 1");
    out[labels[i]].push_back(i);
  }
  return out;
}

}  // namespace

Split train_test_split(std::span<const int> labels, double test_ratio, std::uint64_t seed, bool stratified) {
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) fail(Errc::InvalidConfig, "test ratio must be in (0, 1)");
  const std::size_t n = labels.size();
  auto classes = by_class(labels);
  if (classes[0].empty() || classes[1].empty()) fail(Errc::DegenerateSplit, "split needs both classes");
  const auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_ratio));
  if (n_test == 0 || n_test >= n) fail(Errc::DegenerateSplit, "a split side would be empty");

  Rng rng(mix_seed(seed, kSplitSalt));
  Split s;
  if (stratified) {
    // Largest-remainder allocation of the test size over the classes.
    std::array<double, 2> quota{};
    std::array<std::size_t, 2> take{};
    for (int c = 0; c < 2; ++c) {
      quota[c] = static_cast<double>(n_test) * static_cast<double>(classes[c].size()) / static_cast<double>(n);
      take[c] = static_cast<std::size_t>(std::floor(quota[c]));
    }
    if (take[0] + take[1] < n_test) {
      const int c = quota[1] - std::floor(quota[1]) > quota[0] - std::floor(quota[0]) ? 1 : 0;
      ++take[c];
    }
    for (int c = 0; c < 2; ++c) {
      take[c] = std::min(take[c], classes[c].size());
      rng.shuffle(classes[c]);
      s.test.insert(s.test.end(), classes[c].begin(), classes[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
      s.train.insert(s.train.end(), classes[c].begin() + static_cast<std::ptrdiff_t>(take[c]), classes[c].end());
    }
  } else {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  const auto single = [&](const std::vector<std::size_t>& side) {
    return std::all_of(side.begin(), side.end(), [&](std::size_t i) { return labels[i] == labels[side.front()]; });
  };
  if (single(s.train)) fail(Errc::DegenerateSplit, "training side holds a single class");
  if (!stratified && single(s.test)) fail(Errc::DegenerateSplit, "test side holds a single class");
  return s;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  auto classes = by_class(labels);
  if (k < 2 || labels.size() < static_cast<std::size_t>(k) || classes[0].size() < 2 || classes[1].size() < 2) {
    fail(Errc::InfeasibleFolds, std::to_string(k) + " folds over " + std::to_string(labels.size()) + " rows");
  }
  Rng rng(mix_seed(seed, kFoldSalt));
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  // Deal each shuffled class round-robin, continuing where the last ended.
  std::size_t next = 0;
  for (auto& members : classes) {
    rng.shuffle(members);
    for (std::size_t i : members) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace vocalhf::eval

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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vocalhf/feature_matrix.hpp"
#include "vocalhf/model.hpp"

namespace vocalhf::selection {

struct SelectionConfig {
  double mi_threshold = 0.105;  // nats
  int n_subsets = 15;
  double subset_fraction = 0.8;
  double lasso_strength = 1.2;  // inverse regularization strength of the L1 model
  int target_k = 5;
  /// Fill up to target_k with the best full-cohort MI scores when too few
  /// features pass the stability filter.
  bool top_up = true;
  std::uint64_t seed = 0;
  unsigned jobs = 1;  // not part of the result

  void validate() const;
  nlohmann::json to_json() const;
  static SelectionConfig from_json(const nlohmann::json& j);
};

/// Mutual information (nats) between a continuous column and binary labels
/// by the k = 3 nearest-neighbour estimator, clipped at 0. A tiny seeded
/// jitter (1e-10 of the column scale) breaks exact ties; it is assigned by
/// value rank so the score does not depend on row order. Constant columns
/// score 0. Throws DegenerateInput for fewer than 4 rows or a single class.
double mi_score(std::span<const double> column, std::span<const int> labels, std::uint64_t jitter_seed = 0);

/// Row sets of the stability subsamples: a seeded shuffle per subset, then
/// the first floor(fraction * n) rows, sorted.
std::vector<std::vector<std::size_t>> subsample_rows(std::size_t n, const SelectionConfig& cfg);

/// Full-cohort and subsample-average MI per column. Independent of the
/// threshold and lasso strength, so one table serves a whole grid.
struct MiTable {
  std::vector<std::string> names;
  std::vector<double> full;
  std::vector<double> subset_avg;
};

MiTable mi_table(const features::FeatureMatrix& m, const SelectionConfig& cfg);

/// Names with both scores strictly above the threshold, in column order.
std::vector<std::string> stability_filter(const MiTable& table, double threshold);
std::vector<std::string> stability_filter(const features::FeatureMatrix& m, const SelectionConfig& cfg);

/// |coefficient| of an L1 logistic fit on internally standardized rows, with
/// `strength` as inverse regularization. Throws NonConvergence.
std::vector<double> l1_importance(const model::Rows& rows, std::span<const int> labels, double strength);

struct SelectionReport {
  std::vector<std::string> names;  // every scored column, in order
  std::vector<double> mi_full;
  std::vector<double> mi_subset_avg;
  std::vector<std::string> stage1_survivors;
  bool no_survivors = false;
  std::vector<std::string> topped_up;  // added after the filter, best MI first
  std::vector<std::string> rfe_elimination_order;
  std::vector<std::string> selected;  // column order
  SelectionConfig config;

  nlohmann::json to_json() const;
};

/// Recursive elimination from `candidates` (column order) down to
/// cfg.target_k, one feature per step; ties drop the later column. Throws
/// TooFewSurvivors.
SelectionReport rfe(const features::FeatureMatrix& m, std::span<const std::string> candidates,
                    const SelectionConfig& cfg);

/// Stability filter, optional top-up, then RFE. `table` may carry
/// precomputed scores for the same rows and seed.
SelectionReport select(const features::FeatureMatrix& m, const SelectionConfig& cfg, const MiTable* table = nullptr);

}  // namespace vocalhf::selection

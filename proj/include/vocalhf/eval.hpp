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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vocalhf/feature_matrix.hpp"
#include "vocalhf/model.hpp"
#include "vocalhf/selection.hpp"

namespace vocalhf::eval {

// ---- metrics ----

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o);
};

/// Positive class is label 1. Precision or recall with a zero denominator
/// is 0 and flagged.
struct Metrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  Confusion confusion;
  bool precision_undefined = false;
  bool recall_undefined = false;

  nlohmann::json to_json() const;
};

Metrics metrics_from(const Confusion& c);
Metrics metrics_from(std::span<const int> labels, std::span<const int> predicted);
/// Classifies raw rows with the model and scores them.
Metrics evaluate(const model::LogisticModel& m, const model::Rows& raw_rows, std::span<const int> labels);

// ---- splitting ----

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Test size ceil(n * ratio). Stratified: each class contributes to the
/// test side in proportion (largest remainder), rows picked after a seeded
/// shuffle. Index lists are sorted. Throws DegenerateSplit.
Split train_test_split(std::span<const int> labels, double test_ratio = 0.35, std::uint64_t seed = 0,
                       bool stratified = true);

/// Held-out index lists of k stratified folds. Throws InfeasibleFolds when
/// k < 2, n < k or a class has fewer than 2 members.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

// ---- pipeline ----

struct GridPoint {
  double C = 0.2;
  model::Penalty penalty = model::Penalty::L2;
  double mi_threshold = 0.105;
  double lasso_strength = 1.2;

  nlohmann::json to_json() const;
  static GridPoint from_json(const nlohmann::json& j);
};

struct Grid {
  std::vector<GridPoint> points;

  /// C {0.05, 0.1, 0.2, 0.5, 1.0} x penalty {L1, L2} x MI threshold
  /// {0.05, 0.105, 0.15} x lasso strength {0.8, 1.2, 1.6}.
  static Grid default_grid();
  static Grid product(std::span<const double> Cs, std::span<const model::Penalty> penalties,
                      std::span<const double> thresholds, std::span<const double> strengths);
  nlohmann::json to_json() const;
  static Grid from_json(const nlohmann::json& j);
};

struct PipelineConfig {
  selection::SelectionConfig selection;
  model::Hyper hyper;
  double test_ratio = 0.35;
  bool stratified = true;
  std::optional<Grid> grid;  // searched on the training rows when set
  int inner_folds = 3;
  /// LOOCV only: select features once on the whole cohort (reproduces the
  /// leaky protocol for comparison).
  bool leaky = false;
  std::uint64_t seed = 0;
  unsigned jobs = 1;  // not part of the result

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  PipelineConfig at(const GridPoint& p) const;
};

/// Columns named "clinical/..." bypass selection and always enter the model.
bool is_clinical(std::string_view name);

/// Imputation, selection and the fitted model, all learned from the same
/// training rows.
struct TrainedPipeline {
  std::vector<std::string> input_names;  // columns of the training matrix
  selection::SelectionReport selection;
  model::LogisticModel model;

  /// Model columns taken from a row laid out like input_names, imputed.
  std::vector<double> model_row(std::span<const double> input_row) const;
  model::PredictionRecord predict(std::string_view patient_id, std::span<const double> input_row) const;
  nlohmann::json to_json() const;
};

/// Imputes (training medians), selects acoustic features, appends clinical
/// columns and fits. `table` may hold MI scores of the imputed acoustic
/// columns of the same rows.
TrainedPipeline fit_pipeline(const features::FeatureMatrix& train, const PipelineConfig& cfg,
                             const selection::MiTable* table = nullptr);

/// Training matrix with clinical columns removed and sentinels imputed.
features::FeatureMatrix acoustic_view(const features::FeatureMatrix& m);

// ---- search and cross-validation ----

struct GridRow {
  GridPoint point;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  std::string error;  // set when the point failed on some fold

  nlohmann::json to_json() const;
};

struct GridResult {
  GridPoint best;
  std::size_t best_index = 0;
  std::vector<GridRow> rows;

  nlohmann::json to_json() const;
};

/// Runs the whole pipeline for every grid point on inner stratified folds of
/// `train` and keeps the best mean accuracy; ties prefer lower C, then L2,
/// then lower MI threshold, then grid order.
GridResult grid_search(const features::FeatureMatrix& train, const Grid& grid, const PipelineConfig& base);

struct FoldResult {
  std::size_t index = 0;
  std::vector<std::size_t> test_rows;
  Metrics train;
  Metrics test;
  std::vector<model::PredictionRecord> predictions;
  std::vector<int> test_labels;
  std::vector<std::string> selected;
  GridPoint chosen;
  std::string pipeline_json;  // fitted fold pipeline, kept on request

  nlohmann::json to_json() const;
};

struct CvSummary {
  std::vector<FoldResult> folds;
  Metrics train_avg;
  Metrics test_avg;  // accuracy, precision, recall and f1 averaged over folds
  Metrics pooled;    // from the pooled test confusion
  PipelineConfig config;

  nlohmann::json to_json() const;
};

/// Leave-one-out: n folds, each refitting the full pipeline on n - 1 rows.
/// Fold failures are rethrown with the fold index.
CvSummary loocv(const features::FeatureMatrix& m, const PipelineConfig& cfg, bool keep_models = false);

/// Single stratified train/test evaluation.
struct HoldoutResult {
  Split split;
  TrainedPipeline pipeline;
  Metrics train;
  Metrics test;
  std::optional<GridResult> search;

  nlohmann::json to_json() const;
};

HoldoutResult holdout(const features::FeatureMatrix& m, const PipelineConfig& cfg);

// ---- statistics ----

struct TTest {
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
};

/// Welch's unequal-variance t-test. Throws DegenerateGroups for groups
/// smaller than 2 or zero spread with different means.
TTest t_test(std::span<const double> a, std::span<const double> b);

struct ChiSquare {
  double chi2 = 0.0;
  double p = 1.0;
};

/// Pearson chi-square on a 2x2 table, 1 dof, no continuity correction.
/// Throws DegenerateGroups when a margin is zero.
ChiSquare chi_square(const std::array<std::array<double, 2>, 2>& table);

struct TableRow {
  std::string variable;
  bool categorical = false;
  std::array<std::size_t, 2> n{};
  std::array<double, 2> mean{};  // proportion for categorical rows
  std::array<double, 2> sd{};
  std::array<std::size_t, 2> count{};  // categorical rows only
  double p = 1.0;
};

struct CohortTableInput {
  std::vector<int> labels;
  std::vector<double> predictor;  // acoustic predictor z per patient
  std::vector<std::optional<double>> nt_probnp;
  std::vector<int> predicted;  // classified label per patient (may be empty)
};

/// Two-group summary mirroring a clinical cohort table: group sizes,
/// acoustic predictor mean ± SD with Welch p, NT-proBNP when present,
/// predicted-positive counts with chi-square p.
std::vector<TableRow> cohort_table(const CohortTableInput& in);
std::string cohort_table_csv(std::span<const TableRow> rows);

}  // namespace vocalhf::eval

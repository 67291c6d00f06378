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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace vocalhf::model {

using Rows = std::vector<std::vector<double>>;

enum class Penalty { L1, L2 };

std::string_view to_string(Penalty p);
Penalty penalty_from_string(std::string_view s);

/// Per-column z-score with population standard deviation. Columns with zero
/// spread are frozen: they standardize to 0.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<bool> frozen;

  static Scaler fit(const Rows& rows);
  std::vector<double> apply(std::span<const double> row) const;
  Rows apply(const Rows& rows) const;
  std::size_t size() const { return means.size(); }
};

struct Hyper {
  double C = 0.2;  // inverse regularization strength
  Penalty penalty = Penalty::L2;
  double tol = 1e-8;
  int max_iter = 1000;

  nlohmann::json to_json() const;
  static Hyper from_json(const nlohmann::json& j);
};

/// Result of a solver run on already standardized rows.
struct Solution {
  double theta0 = 0.0;
  std::vector<double> theta;
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;
  double optimality = 0.0;          // final gradient / subgradient violation
  std::vector<double> objective_trace;  // objective at the start and after every step
};

struct Init {
  double theta0 = 0.0;
  std::vector<double> theta;
};

/// ½‖θ‖² + C·Σ ℓᵢ (L2) or ‖θ‖₁ + C·Σ ℓᵢ (L1), with
/// ℓᵢ = log(1 + e^zᵢ) − yᵢ·zᵢ and zᵢ = θ₀ + θ·xᵢ. The intercept is not penalized.
double objective(const Rows& x, std::span<const int> y, double theta0, std::span<const double> theta, double C,
                 Penalty penalty);

struct LossGradient {
  double value = 0.0;
  double d_theta0 = 0.0;
  std::vector<double> d_theta;
};

/// L2 objective and its exact gradient.
LossGradient loss_and_gradient(const Rows& x, std::span<const int> y, double theta0, std::span<const double> theta,
                               double C);

/// Damped Newton on the L2 objective; stops when the gradient max-norm is
/// below tol.
Solution solve_l2(const Rows& x, std::span<const int> y, double C, double tol, int max_iter,
                  const std::optional<Init>& init = std::nullopt);

/// Proximal Newton with coordinate-descent inner solves on the L1 objective;
/// stops when the minimum-norm subgradient is below tol.
Solution solve_l1(const Rows& x, std::span<const int> y, double C, double tol, int max_iter,
                  const std::optional<Init>& init = std::nullopt);

/// Logistic function with z clamped to ±500 and the result kept strictly
/// inside (0, 1).
double sigmoid(double z);

struct TrainMeta {
  std::size_t n_train = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  double final_objective = 0.0;
  int iterations = 0;
};

struct LogisticModel {
  double theta0 = 0.0;
  std::vector<double> theta;
  std::vector<std::string> feature_names;
  Scaler scaler;
  Hyper hyper;
  double decision_threshold = 0.5;
  TrainMeta train_meta;
  /// Fill values for missing inputs, aligned with feature_names (may be empty).
  std::vector<double> imputation;

  /// Acoustic predictor z = θ₀ + θ·standardize(row).
  double acoustic_predictor(std::span<const double> raw_row) const;
  double predict_proba(std::span<const double> raw_row) const;
  int classify(std::span<const double> raw_row) const;
};

/// Standardizes `rows`, fits, and stores the scaler. Throws SingleClass when
/// the labels hold one class only and NonConvergence when the solver stops
/// early.
LogisticModel fit(const Rows& rows, std::span<const int> labels, std::vector<std::string> names, const Hyper& hyper,
                  std::uint64_t seed = 0, const std::optional<Init>& init = std::nullopt);

struct PredictionRecord {
  std::string patient_id;
  double z = 0.0;
  double p = 0.0;
  int label_hat = 0;

  nlohmann::json to_json() const;
};

PredictionRecord predict(const LogisticModel& m, std::string_view patient_id, std::span<const double> raw_row);

struct OddsRatioReport {
  std::string feature;
  double coef_scaled = 0.0;
  double odds_ratio_scaled = 1.0;
  double original_unit_delta = 0.0;
  std::string sentence;

  nlohmann::json to_json() const;
};

/// exp(coefficient) per one training standard deviation of the feature.
OddsRatioReport odds_ratio_report(const LogisticModel& m, std::string_view feature);

inline constexpr int kModelSchemaVersion = 1;

nlohmann::json to_json(const LogisticModel& m);
LogisticModel model_from_json(const nlohmann::json& j);
void save(const LogisticModel& m, const std::filesystem::path& path);
LogisticModel load(const std::filesystem::path& path);

}  // namespace vocalhf::model

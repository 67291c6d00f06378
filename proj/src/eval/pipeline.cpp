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

#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"

namespace vocalhf::eval {
namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json GridPoint::to_json() const {
  return {{"C", C},
          {"penalty", std::string(model::to_string(penalty))},
          {"mi_threshold", mi_threshold},
          {"lasso_strength", lasso_strength}};
}

GridPoint GridPoint::from_json(const nlohmann::json& j) {
  GridPoint p;
  try {
    read_opt(j, "C", p.C);
    if (j.contains("penalty")) p.penalty = model::penalty_from_string(j.at("penalty").get<std::string>());
    read_opt(j, "mi_threshold", p.mi_threshold);
    read_opt(j, "lasso_strength", p.lasso_strength);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidConfig, std::string("grid point: ") + e.what());
  }
  if (!(p.C > 0.0) || !(p.lasso_strength > 0.0)) fail(Errc::InvalidConfig, "grid C and lasso strength must be positive");
  return p;
}

Grid Grid::product(std::span<const double> Cs, std::span<const model::Penalty> penalties,
                   std::span<const double> thresholds, std::span<const double> strengths) {
  Grid g;
  for (double c : Cs) {
    for (auto pen : penalties) {
      for (double t : thresholds) {
        for (double s : strengths) g.points.push_back({c, pen, t, s});
      }
    }
  }
  return g;
}

Grid Grid::default_grid() {
  const double cs[] = {0.05, 0.1, 0.2, 0.5, 1.0};
  const model::Penalty pens[] = {model::Penalty::L1, model::Penalty::L2};
  const double ts[] = {0.05, 0.105, 0.15};
  const double ss[] = {0.8, 1.2, 1.6};
  return product(cs, pens, ts, ss);
}

nlohmann::json Grid::to_json() const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : points) a.push_back(p.to_json());
  return a;
}

Grid Grid::from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "default") return default_grid();
  if (!j.is_array() || j.empty()) fail(Errc::InvalidConfig, "grid must be \"default\" or a non-empty array");
  Grid g;
  for (const auto& p : j) g.points.push_back(GridPoint::from_json(p));
  return g;
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"selection", selection.to_json()},
          {"hyper", hyper.to_json()},
          {"test_ratio", test_ratio},
          {"stratified", stratified},
          {"grid", grid ? grid->to_json() : nlohmann::json(nullptr)},
          {"inner_folds", inner_folds},
          {"leaky", leaky},
          {"seed", seed}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(Errc::InvalidConfig, "pipeline config must be an object");
  PipelineConfig c;
  try {
    if (j.contains("selection")) c.selection = selection::SelectionConfig::from_json(j.at("selection"));
    if (j.contains("hyper")) c.hyper = model::Hyper::from_json(j.at("hyper"));
    read_opt(j, "test_ratio", c.test_ratio);
    read_opt(j, "stratified", c.stratified);
    if (j.contains("grid") && !j.at("grid").is_null()) c.grid = Grid::from_json(j.at("grid"));
    read_opt(j, "inner_folds", c.inner_folds);
    read_opt(j, "leaky", c.leaky);
    read_opt(j, "seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidConfig, std::string("pipeline config: ") + e.what());
  }
  c.selection.seed = c.seed;
  return c;
}

PipelineConfig PipelineConfig::at(const GridPoint& p) const {
  PipelineConfig c = *this;
  c.hyper.C = p.C;
  c.hyper.penalty = p.penalty;
  c.selection.mi_threshold = p.mi_threshold;
  c.selection.lasso_strength = p.lasso_strength;
  c.grid.reset();
  return c;
}

bool is_clinical(std::string_view name) { return name.starts_with("clinical/"); }

features::FeatureMatrix acoustic_view(const features::FeatureMatrix& m) {
  std::vector<std::string> keep;
  for (const auto& n : m.names) {
    if (!is_clinical(n)) keep.push_back(n);
  }
  return features::impute(m.subset_cols(keep));
}

std::vector<double> TrainedPipeline::model_row(std::span<const double> input_row) const {
  if (input_row.size() != input_names.size()) fail(Errc::DimensionMismatch, "row width differs from the pipeline input");
  std::vector<double> row;
  row.reserve(model.feature_names.size());
  for (const auto& name : model.feature_names) {
    const auto it = std::find(input_names.begin(), input_names.end(), name);
    if (it == input_names.end()) fail(Errc::UnknownFeature, "pipeline input lacks " + name);
    row.push_back(input_row[static_cast<std::size_t>(it - input_names.begin())]);
  }
  features::apply_imputation(row, model.imputation);
  return row;
}

model::PredictionRecord TrainedPipeline::predict(std::string_view patient_id, std::span<const double> input_row) const {
  return model::predict(model, patient_id, model_row(input_row));
}

nlohmann::json TrainedPipeline::to_json() const {
  return {{"input_names", input_names}, {"selection", selection.to_json()}, {"model", model::to_json(model)}};
}

TrainedPipeline fit_pipeline(const features::FeatureMatrix& train, const PipelineConfig& cfg,
                             const selection::MiTable* table) {
  auto sel_cfg = cfg.selection;
  sel_cfg.seed = cfg.seed;
  sel_cfg.jobs = cfg.jobs;

  const auto imputed = features::impute(train);
  std::vector<std::string> acoustic, clinical;
  for (const auto& n : imputed.names) (is_clinical(n) ? clinical : acoustic).push_back(n);

  TrainedPipeline p;
  p.input_names = train.names;
  p.selection = selection::select(imputed.subset_cols(acoustic), sel_cfg, table);

  auto names = p.selection.selected;
  names.insert(names.end(), clinical.begin(), clinical.end());
  const auto cols = imputed.subset_cols(names);
  p.model = model::fit(cols.rows, cols.labels, names, cfg.hyper, cfg.seed);
  p.model.imputation = cols.imputation;
  return p;
}

}  // namespace vocalhf::eval

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
#include <limits>
#include <numeric>

#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"
#include "vocalhf/parallel.hpp"
#include "vocalhf/rng.hpp"

namespace vocalhf::eval {
namespace {

constexpr std::uint64_t kInnerSalt = 0x510e527fade682d1ULL;

std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> held) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(held.begin(), held.end(), i) == held.end()) out.push_back(i);
  }
  return out;
}

double accuracy_on(const TrainedPipeline& p, const features::FeatureMatrix& m) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    hit += p.predict(m.patient_ids[i], m.rows[i]).label_hat == m.labels[i] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(m.n_rows());
}

Metrics score(const TrainedPipeline& p, const features::FeatureMatrix& m, std::vector<model::PredictionRecord>* out) {
  std::vector<int> predicted;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    auto rec = p.predict(m.patient_ids[i], m.rows[i]);
    predicted.push_back(rec.label_hat);
    if (out != nullptr) out->push_back(std::move(rec));
  }
  return metrics_from(m.labels, predicted);
}

// True when a should rank above b at equal mean score.
bool preferred(const GridPoint& a, const GridPoint& b) {
  if (a.C != b.C) return a.C < b.C;
  if (a.penalty != b.penalty) return a.penalty == model::Penalty::L2;
  return a.mi_threshold < b.mi_threshold;
}

Metrics average(std::span<const Metrics> ms) {
  Metrics avg;
  for (const auto& m : ms) {
    avg.accuracy += m.accuracy;
    avg.precision += m.precision;
    avg.recall += m.recall;
    avg.f1 += m.f1;
    avg.confusion += m.confusion;
  }
  const auto k = static_cast<double>(ms.size());
  avg.accuracy /= k;
  avg.precision /= k;
  avg.recall /= k;
  avg.f1 /= k;
  return avg;
}

TrainedPipeline fit_fold(const features::FeatureMatrix& train, const PipelineConfig& cfg, GridPoint& chosen) {
  if (!cfg.grid) {
    chosen = {cfg.hyper.C, cfg.hyper.penalty, cfg.selection.mi_threshold, cfg.selection.lasso_strength};
    return fit_pipeline(train, cfg);
  }
  auto inner = cfg;
  inner.jobs = 1;
  chosen = grid_search(train, *cfg.grid, inner).best;
  return fit_pipeline(train, inner.at(chosen));
}

}  // namespace

GridResult grid_search(const features::FeatureMatrix& train, const Grid& grid, const PipelineConfig& base) {
  if (grid.points.empty()) fail(Errc::InvalidConfig, "grid is empty");
  const auto folds = stratified_folds(train.labels, base.inner_folds, mix_seed(base.seed, kInnerSalt));
  const std::size_t n_pts = grid.points.size();

  std::vector<std::vector<double>> scores(n_pts, std::vector<double>(folds.size(), 0.0));
  std::vector<std::string> errors(n_pts);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto fit_rows = complement(train.n_rows(), folds[f]);
    const auto fold_train = train.subset_rows(fit_rows);
    const auto fold_val = train.subset_rows(folds[f]);
    auto sel_cfg = base.selection;
    sel_cfg.seed = base.seed;
    sel_cfg.jobs = base.jobs;
    const auto table = selection::mi_table(acoustic_view(fold_train), sel_cfg);
    parallel_for(n_pts, base.jobs, [&](std::size_t k) {
      try {
        scores[k][f] = accuracy_on(fit_pipeline(fold_train, base.at(grid.points[k]), &table), fold_val);
      } catch (const Error& e) {
        if (e.code() != Errc::TooFewSurvivors && e.code() != Errc::NonConvergence) throw;
        scores[k][f] = std::numeric_limits<double>::quiet_NaN();
        if (errors[k].empty()) errors[k] = "fold " + std::to_string(f) + ": " + e.what();
      }
    });
  }

  GridResult res;
  bool found = false;
  for (std::size_t k = 0; k < n_pts; ++k) {
    GridRow row;
    row.point = grid.points[k];
    row.fold_scores = scores[k];
    row.error = errors[k];
    row.mean_score = std::accumulate(scores[k].begin(), scores[k].end(), 0.0) / static_cast<double>(folds.size());
    if (row.error.empty()) {
      const auto& cur = res.rows.empty() ? row : res.rows[res.best_index];
      const bool better = !found || row.mean_score > cur.mean_score ||
                          (row.mean_score == cur.mean_score && preferred(row.point, cur.point));
      if (better) {
        res.best_index = k;
        found = true;
      }
    }
    res.rows.push_back(std::move(row));
  }
  if (!found) fail(Errc::TooFewSurvivors, "every grid point failed: " + res.rows.front().error);
  res.best = res.rows[res.best_index].point;
  return res;
}

CvSummary loocv(const features::FeatureMatrix& m, const PipelineConfig& cfg, bool keep_models) {
  const std::size_t n = m.n_rows();
  const auto ones = static_cast<std::size_t>(std::count(m.labels.begin(), m.labels.end(), 1));
  if (n < 3 || ones == 0 || ones == n) fail(Errc::DegenerateSplit, "cross-validation needs 3 rows and both classes");

  // Leaky protocol: features chosen once with every row visible.
  std::optional<TrainedPipeline> global;
  if (cfg.leaky) {
    GridPoint unused;
    global = fit_fold(m, cfg, unused);
  }

  CvSummary s;
  s.config = cfg;
  s.folds.resize(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    try {
      FoldResult& fr = s.folds[i];
      fr.index = i;
      fr.test_rows = {i};
      const std::size_t held[] = {i};
      const auto train = m.subset_rows(complement(n, held));
      const auto test = m.subset_rows(held);
      auto fold_cfg = cfg;
      fold_cfg.jobs = 1;
      TrainedPipeline p;
      if (global) {
        const auto imputed = features::impute(m);
        const auto names = global->model.feature_names;
        const auto cols = imputed.subset_cols(names).subset_rows(complement(n, held));
        p.input_names = m.names;
        p.selection = global->selection;
        fold_cfg.hyper = global->model.hyper;
        p.model = model::fit(cols.rows, cols.labels, names, fold_cfg.hyper, cfg.seed);
        p.model.imputation = imputed.imputation.empty() ? std::vector<double>{} : cols.imputation;
        fr.chosen = {p.model.hyper.C, p.model.hyper.penalty, cfg.selection.mi_threshold, cfg.selection.lasso_strength};
      } else {
        p = fit_fold(train, fold_cfg, fr.chosen);
      }
      fr.selected = p.model.feature_names;
      fr.train = score(p, train, nullptr);
      fr.test = score(p, test, &fr.predictions);
      fr.test_labels = test.labels;
      if (keep_models) fr.pipeline_json = p.to_json().dump();
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(i) + ": " + e.what());
    }
  });

  std::vector<Metrics> tr, te;
  Confusion pooled;
  for (const auto& f : s.folds) {
    tr.push_back(f.train);
    te.push_back(f.test);
    pooled += f.test.confusion;
  }
  s.train_avg = average(tr);
  s.test_avg = average(te);
  s.pooled = metrics_from(pooled);
  return s;
}

HoldoutResult holdout(const features::FeatureMatrix& m, const PipelineConfig& cfg) {
  HoldoutResult r;
  r.split = train_test_split(m.labels, cfg.test_ratio, cfg.seed, cfg.stratified);
  const auto train = m.subset_rows(r.split.train);
  const auto test = m.subset_rows(r.split.test);
  auto use = cfg;
  if (cfg.grid) {
    r.search = grid_search(train, *cfg.grid, cfg);
    use = cfg.at(r.search->best);
  }
  r.pipeline = fit_pipeline(train, use);
  r.train = score(r.pipeline, train, nullptr);
  r.test = score(r.pipeline, test, nullptr);
  return r;
}

nlohmann::json GridRow::to_json() const {
  return {{"point", point.to_json()}, {"fold_scores", fold_scores}, {"mean_score", mean_score}, {"error", error}};
}

nlohmann::json GridResult::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) rs.push_back(r.to_json());
  return {{"best", best.to_json()}, {"best_index", best_index}, {"rows", rs}};
}

nlohmann::json FoldResult::to_json() const {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : predictions) preds.push_back(p.to_json());
  return {{"index", index},   {"test_rows", test_rows},     {"train", train.to_json()},
          {"test", test.to_json()}, {"predictions", preds}, {"test_labels", test_labels},
          {"selected", selected}, {"chosen", chosen.to_json()}};
}

nlohmann::json CvSummary::to_json() const {
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : folds) fs.push_back(f.to_json());
  return {{"n_folds", folds.size()},
          {"folds", fs},
          {"train_avg", train_avg.to_json()},
          {"test_avg", test_avg.to_json()},
          {"pooled_test", pooled.to_json()},
          {"config", config.to_json()}};
}

nlohmann::json HoldoutResult::to_json() const {
  nlohmann::json j = {{"train_rows", split.train},
                      {"test_rows", split.test},
                      {"train", train.to_json()},
                      {"test", test.to_json()},
                      {"pipeline", pipeline.to_json()}};
  if (search) j["grid"] = search->to_json();
  return j;
}

}  // namespace vocalhf::eval

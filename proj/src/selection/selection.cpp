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
#include <limits>
#include <numeric>

#include "vocalhf/error.hpp"
#include "vocalhf/parallel.hpp"
#include "vocalhf/rng.hpp"
#include "vocalhf/selection.hpp"

namespace vocalhf::selection {
namespace {

constexpr double kL1Tol = 1e-6;
constexpr int kL1MaxIter = 10000;
constexpr std::uint64_t kJitterSalt = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kSubsetSalt = 0xbb67ae8584caa73bULL;

std::uint64_t jitter_seed(std::uint64_t seed, std::size_t column) { return mix_seed(seed ^ kJitterSalt, column); }

// MI of one column on the rows in `idx`; 0 when the rows hold one class.
double subset_score(const features::FeatureMatrix& m, std::size_t j, std::span<const std::size_t> idx,
                    std::uint64_t seed) {
  std::vector<double> col(idx.size());
  std::vector<int> lab(idx.size());
  int ones = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    col[r] = m.rows[idx[r]][j];
    lab[r] = m.labels[idx[r]];
    ones += lab[r];
  }
  if (ones == 0 || ones == static_cast<int>(idx.size())) return 0.0;
  return mi_score(col, lab, jitter_seed(seed, j));
}

}  // namespace

void SelectionConfig::validate() const {
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) fail(Errc::InvalidConfig, "subset_fraction must be in (0, 1]");
  if (target_k < 1) fail(Errc::InvalidConfig, "target_k must be at least 1");
  if (n_subsets < 1) fail(Errc::InvalidConfig, "n_subsets must be at least 1");
  if (!(lasso_strength > 0.0)) fail(Errc::InvalidConfig, "lasso_strength must be positive");
  if (std::isnan(mi_threshold)) fail(Errc::InvalidConfig, "mi_threshold must be a number");
}

nlohmann::json SelectionConfig::to_json() const {
  return {{"mi_threshold", mi_threshold}, {"n_subsets", n_subsets},   {"subset_fraction", subset_fraction},
          {"lasso_strength", lasso_strength}, {"target_k", target_k}, {"top_up", top_up},
          {"seed", seed}};
}

SelectionConfig SelectionConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(Errc::InvalidConfig, "selection config must be an object");
  SelectionConfig c;
  try {
    if (j.contains("mi_threshold")) c.mi_threshold = j.at("mi_threshold").get<double>();
    if (j.contains("n_subsets")) c.n_subsets = j.at("n_subsets").get<int>();
    if (j.contains("subset_fraction")) c.subset_fraction = j.at("subset_fraction").get<double>();
    if (j.contains("lasso_strength")) c.lasso_strength = j.at("lasso_strength").get<double>();
    if (j.contains("target_k")) c.target_k = j.at("target_k").get<int>();
    if (j.contains("top_up")) c.top_up = j.at("top_up").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidConfig, std::string("selection config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::vector<std::size_t>> subsample_rows(std::size_t n, const SelectionConfig& cfg) {
  cfg.validate();
  const auto take = static_cast<std::size_t>(std::floor(cfg.subset_fraction * static_cast<double>(n)));
  std::vector<std::vector<std::size_t>> out;
  for (int s = 0; s < cfg.n_subsets; ++s) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(mix_seed(cfg.seed ^ kSubsetSalt, static_cast<std::uint64_t>(s)));
    rng.shuffle(idx);
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    out.push_back(std::move(idx));
  }
  return out;
}

MiTable mi_table(const features::FeatureMatrix& m, const SelectionConfig& cfg) {
  cfg.validate();
  const std::size_t n = m.n_rows();
  if (n < 4 || static_cast<double>(n) < std::ceil(1.0 / cfg.subset_fraction)) {
    fail(Errc::DegenerateInput, "too few rows for the stability filter");
  }
  if (m.has_missing()) fail(Errc::DegenerateInput, "selection needs an imputed matrix");
  const auto subsets = subsample_rows(n, cfg);
  std::vector<std::size_t> everyone(n);
  std::iota(everyone.begin(), everyone.end(), 0);

  MiTable t;
  t.names = m.names;
  t.full.assign(m.n_cols(), 0.0);
  t.subset_avg.assign(m.n_cols(), 0.0);
  parallel_for(m.n_cols(), cfg.jobs, [&](std::size_t j) {
    t.full[j] = subset_score(m, j, everyone, cfg.seed);
    double acc = 0.0;
    for (const auto& idx : subsets) acc += subset_score(m, j, idx, cfg.seed);
    t.subset_avg[j] = acc / static_cast<double>(subsets.size());
  });
  return t;
}

std::vector<std::string> stability_filter(const MiTable& table, double threshold) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    if (table.full[j] > threshold && table.subset_avg[j] > threshold) out.push_back(table.names[j]);
  }
  return out;
}

std::vector<std::string> stability_filter(const features::FeatureMatrix& m, const SelectionConfig& cfg) {
  return stability_filter(mi_table(m, cfg), cfg.mi_threshold);
}

std::vector<double> l1_importance(const model::Rows& rows, std::span<const int> labels, double strength) {
  const auto scaler = model::Scaler::fit(rows);
  const auto sol = model::solve_l1(scaler.apply(rows), labels, strength, kL1Tol, kL1MaxIter);
  if (!sol.converged) {
    fail(Errc::NonConvergence, "L1 fit did not reach tolerance; violation " + std::to_string(sol.optimality));
  }
  std::vector<double> out(sol.theta.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = scaler.frozen[j] ? 0.0 : std::abs(sol.theta[j]);
  return out;
}

SelectionReport rfe(const features::FeatureMatrix& m, std::span<const std::string> candidates,
                    const SelectionConfig& cfg) {
  cfg.validate();
  if (candidates.size() < static_cast<std::size_t>(cfg.target_k)) {
    fail(Errc::TooFewSurvivors, std::to_string(candidates.size()) + " candidates for " +
                                    std::to_string(cfg.target_k) + " features");
  }
  // Keep column order so ties resolve the same way for any caller.
  std::vector<std::size_t> cols;
  for (const auto& name : candidates) cols.push_back(m.index_of(name));
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  if (cols.size() < static_cast<std::size_t>(cfg.target_k)) fail(Errc::TooFewSurvivors, "duplicate candidates");

  SelectionReport rep;
  rep.config = cfg;
  while (cols.size() > static_cast<std::size_t>(cfg.target_k)) {
    model::Rows rows(m.n_rows());
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
      for (std::size_t j : cols) rows[i].push_back(m.rows[i][j]);
    }
    const auto imp = l1_importance(rows, m.labels, cfg.lasso_strength);
    std::size_t drop = 0;
    for (std::size_t k = 1; k < imp.size(); ++k) {
      if (imp[k] <= imp[drop]) drop = k;
    }
    rep.rfe_elimination_order.push_back(m.names[cols[drop]]);
    cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  for (std::size_t j : cols) rep.selected.push_back(m.names[j]);
  return rep;
}

SelectionReport select(const features::FeatureMatrix& m, const SelectionConfig& cfg, const MiTable* table) {
  cfg.validate();
  MiTable own;
  if (table == nullptr) {
    own = mi_table(m, cfg);
    table = &own;
  }
  if (table->names != m.names) fail(Errc::DimensionMismatch, "MI table does not match the matrix");

  auto survivors = stability_filter(*table, cfg.mi_threshold);
  std::vector<std::string> topped;
  if (cfg.top_up && survivors.size() < static_cast<std::size_t>(cfg.target_k)) {
    std::vector<std::size_t> order(m.n_cols());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return table->full[a] > table->full[b]; });
    for (std::size_t j : order) {
      if (survivors.size() + topped.size() >= static_cast<std::size_t>(cfg.target_k)) break;
      if (std::find(survivors.begin(), survivors.end(), m.names[j]) == survivors.end()) topped.push_back(m.names[j]);
    }
  }
  auto candidates = survivors;
  candidates.insert(candidates.end(), topped.begin(), topped.end());

  auto rep = rfe(m, candidates, cfg);
  rep.names = table->names;
  rep.mi_full = table->full;
  rep.mi_subset_avg = table->subset_avg;
  rep.stage1_survivors = std::move(survivors);
  rep.no_survivors = rep.stage1_survivors.empty();
  rep.topped_up = std::move(topped);
  return rep;
}

nlohmann::json SelectionReport::to_json() const {
  nlohmann::json full = nlohmann::json::object();
  nlohmann::json avg = nlohmann::json::object();
  for (std::size_t j = 0; j < names.size(); ++j) {
    full[names[j]] = mi_full[j];
    avg[names[j]] = mi_subset_avg[j];
  }
  return {{"mi_full", full},
          {"mi_subset_avg", avg},
          {"stage1_survivors", stage1_survivors},
          {"no_survivors", no_survivors},
          {"topped_up", topped_up},
          {"rfe_elimination_order", rfe_elimination_order},
          {"selected", selected},
          {"config", config.to_json()},
          {"seed", config.seed}};
}

}  // namespace vocalhf::selection

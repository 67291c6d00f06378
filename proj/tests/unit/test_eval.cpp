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


#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "support.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"
#include "vocalhf/rng.hpp"

using namespace vocalhf;
using eval::PipelineConfig;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

std::vector<int> cohort_labels(std::size_t n0, std::size_t n1) {
  std::vector<int> y(n0, 0);
  y.insert(y.end(), n1, 1);
  return y;
}

std::size_t ones_in(std::span<const int> y, const std::vector<std::size_t>& idx) {
  std::size_t c = 0;
  for (auto i : idx) c += y[i] == 1;
  return c;
}

// Small matrix where a few columns carry the label.
features::FeatureMatrix easy_matrix(std::size_t n, std::uint64_t seed) {
  return vocalhf::testing::planted_matrix(n, 4, 26, 2.5, seed);
}

}  // namespace

TEST_CASE("split of 29 patients") {
  const auto y = cohort_labels(15, 14);
  const auto s = eval::train_test_split(y, 0.35, 1);
  CHECK(s.train.size() == 18);
  CHECK(s.test.size() == 11);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(29);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);
  CHECK(std::is_sorted(s.test.begin(), s.test.end()));
  const auto t1 = ones_in(y, s.test);
  CHECK((t1 == 5 || t1 == 6));
  const auto again = eval::train_test_split(y, 0.35, 1);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
}

TEST_CASE("stratified half split") {
  const auto y = cohort_labels(5, 5);
  const auto s = eval::train_test_split(y, 0.5, 3);
  CHECK(s.train.size() == 5);
  CHECK(s.test.size() == 5);
  const auto t1 = ones_in(y, s.test);
  CHECK((t1 == 2 || t1 == 3));
  CHECK(ones_in(y, s.train) == 5 - t1);
}

TEST_CASE("split errors") {
  const std::vector<int> single(10, 0);
  CHECK(code_of([&] { eval::train_test_split(single, 0.35, 0); }) == Errc::DegenerateSplit);
  const auto y = cohort_labels(5, 5);
  CHECK(code_of([&] { eval::train_test_split(y, 1.0, 0); }) == Errc::InvalidConfig);
  // Unstratified: some seed puts one class entirely on a side of a 4-row split.
  const auto small = cohort_labels(2, 2);
  bool raised = false;
  for (std::uint64_t seed = 0; seed < 50 && !raised; ++seed) {
    try {
      eval::train_test_split(small, 0.5, seed, false);
    } catch (const Error& e) {
      raised = e.code() == Errc::DegenerateSplit;
    }
  }
  CHECK(raised);
}

TEST_CASE("metrics") {
  const std::vector<int> y{1, 0, 1};
  const auto perfect = eval::metrics_from(y, y);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const std::vector<int> y2{1, 1, 0}, zeros{0, 0, 0};
  const auto none = eval::metrics_from(y2, zeros);
  CHECK(none.precision == 0.0);
  CHECK(none.precision_undefined);
  CHECK(none.recall == 0.0);
  CHECK_FALSE(none.recall_undefined);
  CHECK(none.accuracy == doctest::Approx(1.0 / 3.0));
  CHECK(none.f1 == 0.0);

  eval::Confusion c;
  c.tp = 4;
  c.fp = 1;
  c.tn = 5;
  c.fn = 1;
  const auto m = eval::metrics_from(c);
  CHECK(m.precision == doctest::Approx(0.8));
  CHECK(m.recall == doctest::Approx(0.8));
  CHECK(m.f1 == doctest::Approx(0.8));
  CHECK(m.accuracy == doctest::Approx(9.0 / 11.0));
  CHECK(m.to_json().at("confusion").at("tp") == 4);
}

TEST_CASE("stratified folds") {
  const auto y = cohort_labels(15, 14);
  const auto folds = eval::stratified_folds(y, 3, 4);
  REQUIRE(folds.size() == 3);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    CHECK(f.size() >= 9);
    CHECK(f.size() <= 10);
    const auto o = ones_in(y, f);
    CHECK(o >= 4);
    CHECK(o <= 5);
    seen.insert(f.begin(), f.end());
  }
  CHECK(seen.size() == 29);
  CHECK(eval::stratified_folds(y, 3, 4) == folds);
  CHECK(code_of([&] { eval::stratified_folds(y, 1, 0); }) == Errc::InfeasibleFolds);
  CHECK(code_of([&] { eval::stratified_folds(cohort_labels(1, 5), 2, 0); }) == Errc::InfeasibleFolds);
  CHECK(code_of([&] { eval::stratified_folds(cohort_labels(3, 3), 7, 0); }) == Errc::InfeasibleFolds);
}

TEST_CASE("default grid") {
  const auto g = eval::Grid::default_grid();
  CHECK(g.points.size() == 90);
  CHECK(std::any_of(g.points.begin(), g.points.end(), [](const eval::GridPoint& p) {
    return p.C == 0.2 && p.penalty == model::Penalty::L2 && p.mi_threshold == 0.105 && p.lasso_strength == 1.2;
  }));
  CHECK(eval::Grid::from_json("default").points.size() == 90);
  CHECK(eval::Grid::from_json(g.to_json()).to_json() == g.to_json());
}

TEST_CASE("single-point grid") {
  const auto m = easy_matrix(24, 3);
  PipelineConfig cfg;
  cfg.seed = 2;
  eval::GridPoint p;
  p.C = 0.5;
  p.penalty = model::Penalty::L1;
  eval::Grid grid;
  grid.points = {p};
  const auto r = eval::grid_search(m, grid, cfg);
  CHECK(r.best_index == 0);
  CHECK(r.best.C == 0.5);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].fold_scores.size() == 3);
  CHECK(r.rows[0].error.empty());
}

TEST_CASE("grid search on a separable matrix") {
  const auto m = easy_matrix(30, 5);
  PipelineConfig cfg;
  cfg.seed = 5;
  const auto grid = eval::Grid::default_grid();
  const auto r = eval::grid_search(m, grid, cfg);
  CHECK(r.rows.size() == 90);
  CHECK(r.rows[r.best_index].mean_score >= 0.9);
  for (const auto& row : r.rows) {
    if (row.error.empty()) CHECK(row.mean_score <= r.rows[r.best_index].mean_score);
  }
  CHECK(eval::grid_search(m, grid, cfg).to_json() == r.to_json());
}

TEST_CASE("leave-one-out over 29 rows") {
  const auto m = easy_matrix(29, 7);
  PipelineConfig cfg;
  cfg.seed = 1;
  const auto start = std::chrono::steady_clock::now();
  const auto cv = eval::loocv(m, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("loocv over 29 rows took " << secs << " s");
  REQUIRE(cv.folds.size() == 29);
  std::size_t predictions = 0;
  double mean_acc = 0.0;
  std::set<std::size_t> held;
  for (const auto& f : cv.folds) {
    CHECK(f.test_rows.size() == 1);
    held.insert(f.test_rows.begin(), f.test_rows.end());
    predictions += f.predictions.size();
    mean_acc += f.test.accuracy / 29.0;
    CHECK(f.selected.size() == 5);
  }
  CHECK(held.size() == 29);
  CHECK(predictions == 29);
  CHECK(cv.pooled.confusion.total() == 29);
  CHECK(cv.test_avg.accuracy == doctest::Approx(mean_acc));
  CHECK(cv.pooled.accuracy == doctest::Approx(mean_acc));
  CHECK(cv.test_avg.accuracy >= 0.8);
}

TEST_CASE("leave-one-out is independent of the job count") {
  const auto m = easy_matrix(16, 2);
  PipelineConfig a;
  a.seed = 4;
  auto b = a;
  b.jobs = 3;
  CHECK(eval::loocv(m, a).to_json().dump() == eval::loocv(m, b).to_json().dump());
}

TEST_CASE("held-out rows never reach a fold model") {
  const auto m = easy_matrix(14, 8);
  PipelineConfig cfg;
  cfg.seed = 6;
  const auto base = eval::loocv(m, cfg, true);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    CAPTURE(i);
    auto corrupt = m;
    for (auto& v : corrupt.rows[i]) v = v * -37.0 + 1e3;
    const auto cv = eval::loocv(corrupt, cfg, true);
    REQUIRE(cv.folds[i].test_rows == std::vector<std::size_t>{i});
    CHECK(cv.folds[i].pipeline_json == base.folds[i].pipeline_json);
    CHECK_FALSE(cv.folds[i].pipeline_json.empty());
  }
}

TEST_CASE("leaky leave-one-out selects once") {
  const auto m = easy_matrix(14, 9);
  PipelineConfig cfg;
  cfg.seed = 3;
  cfg.leaky = true;
  const auto cv = eval::loocv(m, cfg);
  for (const auto& f : cv.folds) CHECK(f.selected == cv.folds[0].selected);
}

TEST_CASE("fold failures carry the fold index") {
  auto m = easy_matrix(8, 1);
  PipelineConfig cfg;
  cfg.selection.target_k = 40;
  cfg.selection.top_up = false;
  try {
    eval::loocv(m, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("fold 0: ", 0) == 0);
  }
}

TEST_CASE("pipeline prediction matches its own training predictor") {
  auto m = easy_matrix(20, 12);
  m.rows[3][0] = features::kMissing;
  PipelineConfig cfg;
  cfg.seed = 11;
  const auto tp = eval::fit_pipeline(m, cfg);
  CHECK(tp.input_names == m.names);
  CHECK(tp.model.feature_names == tp.selection.selected);
  const auto rec = tp.predict("p3", m.rows[3]);
  CHECK(std::isfinite(rec.z));
  CHECK(rec.p == doctest::Approx(model::sigmoid(rec.z)));
}

TEST_CASE("clinical columns bypass selection") {
  auto m = easy_matrix(20, 13);
  std::vector<double> bnp;
  for (std::size_t i = 0; i < m.n_rows(); ++i) bnp.push_back(12000.0 + 9800.0 * (m.labels[i] ? 0.5 : -0.5));
  m = features::append_clinical(m, "nt_probnp", bnp);
  PipelineConfig cfg;
  cfg.seed = 1;
  const auto tp = eval::fit_pipeline(m, cfg);
  CHECK(tp.model.feature_names.size() == 6);
  CHECK(tp.model.feature_names.back() == "clinical/nt_probnp");
  for (const auto& n : tp.selection.names) CHECK_FALSE(eval::is_clinical(n));
  CHECK(eval::is_clinical("clinical/nt_probnp"));
  CHECK_FALSE(eval::is_clinical("Section2.wav/phonation/avg apq"));
}

TEST_CASE("holdout evaluation") {
  const auto m = easy_matrix(29, 14);
  PipelineConfig cfg;
  cfg.seed = 2;
  const auto h = eval::holdout(m, cfg);
  CHECK(h.split.train.size() == 18);
  CHECK(h.split.test.size() == 11);
  CHECK(h.test.confusion.total() == 11);
  CHECK(h.train.confusion.total() == 18);
  CHECK_FALSE(h.search.has_value());
}

TEST_CASE("pipeline config json") {
  PipelineConfig cfg;
  cfg.seed = 5;
  cfg.selection.seed = 5;
  cfg.inner_folds = 4;
  cfg.grid = eval::Grid::default_grid();
  const auto back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  eval::GridPoint p;
  p.C = 1.0;
  p.mi_threshold = 0.05;
  const auto at = cfg.at(p);
  CHECK(at.hyper.C == 1.0);
  CHECK(at.selection.mi_threshold == 0.05);
}

TEST_CASE("welch t-test") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const auto same = eval::t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p_two_sided == doctest::Approx(1.0));
  Rng rng(1);
  std::vector<double> lo, hi;
  for (int i = 0; i < 5; ++i) {
    lo.push_back(1e-3 * rng.normal());
    hi.push_back(1.0 + 1e-3 * rng.normal());
  }
  CHECK(eval::t_test(lo, hi).p_two_sided < 0.001);
  const std::vector<double> x{1.0, 2.5, 2.0, 4.0, 3.3}, y{2.0, 5.0, 3.0, 6.5};
  const auto xy = eval::t_test(x, y);
  const auto yx = eval::t_test(y, x);
  CHECK(xy.t == doctest::Approx(-yx.t));
  CHECK(xy.p_two_sided == doctest::Approx(yx.p_two_sided));
  // Reference values from an independent Welch implementation.
  CHECK(xy.t == doctest::Approx(-1.3810003283803751).epsilon(1e-12));
  CHECK(xy.dof == doctest::Approx(4.557558121077477).epsilon(1e-12));
  CHECK(xy.p_two_sided == doctest::Approx(0.23114577245375845).epsilon(1e-10));
  const std::vector<double> one{1.0};
  CHECK(code_of([&] { eval::t_test(one, a); }) == Errc::DegenerateGroups);
}

TEST_CASE("chi-square") {
  const auto r = eval::chi_square({{{10, 0}, {0, 10}}});
  CHECK(r.chi2 == doctest::Approx(20.0));
  CHECK(r.p < 1e-4);
  const auto a = eval::chi_square({{{7, 3}, {2, 8}}});
  const auto b = eval::chi_square({{{7, 2}, {3, 8}}});
  CHECK(a.chi2 == doctest::Approx(b.chi2));
  CHECK(a.p == doctest::Approx(b.p));
  CHECK(a.chi2 == doctest::Approx(5.05050505050505).epsilon(1e-12));
  CHECK(a.p == doctest::Approx(0.024618761380815174).epsilon(1e-10));
  CHECK(code_of([] { eval::chi_square({{{0, 0}, {3, 4}}}); }) == Errc::DegenerateGroups);
}

TEST_CASE("cohort table under planted separation") {
  Rng rng(2);
  eval::CohortTableInput in;
  for (int i = 0; i < 29; ++i) {
    const int label = i < 15 ? 0 : 1;
    in.labels.push_back(label);
    in.predictor.push_back((label ? 0.81 : 0.21) + (label ? 0.17 : 0.19) * rng.normal());
    in.nt_probnp.push_back(label ? std::optional<double>(9000.0 + 2000.0 * rng.normal()) : std::nullopt);
    in.predicted.push_back(in.predictor.back() >= 0.5 ? 1 : 0);
  }
  in.nt_probnp[0] = 800.0;
  in.nt_probnp[1] = 900.0;
  const auto rows = eval::cohort_table(in);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].variable == "N");
  CHECK(rows[0].count == std::array<std::size_t, 2>{15, 14});
  CHECK(rows[1].variable == "acoustic predictor");
  CHECK(rows[1].p < 0.001);
  CHECK(rows[2].variable == "NT-proBNP");
  CHECK(rows[2].n == std::array<std::size_t, 2>{2, 14});
  CHECK(rows[3].variable == "predicted positive");
  const auto csv = eval::cohort_table_csv(rows);
  CHECK(csv.rfind("variable,group0,group1,p\n", 0) == 0);
  CHECK(csv.find("N=15 (51.7%)") != std::string::npos);
  CHECK(csv.find("acoustic predictor,") != std::string::npos);
  CHECK(csv.find("<0.001") != std::string::npos);
}

TEST_CASE("cohort table of identical groups") {
  std::size_t false_positives = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    eval::CohortTableInput in;
    for (int i = 0; i < 30; ++i) {
      in.labels.push_back(i % 2);
      in.predictor.push_back(rng.normal());
      in.nt_probnp.push_back(3000.0 + 1000.0 * rng.normal());
      in.predicted.push_back(rng.uniform() < 0.5 ? 1 : 0);
    }
    for (const auto& r : eval::cohort_table(in)) {
      if (r.variable != "N" && r.p < 0.05) ++false_positives;
    }
  }
  CHECK(false_positives <= 1);
}

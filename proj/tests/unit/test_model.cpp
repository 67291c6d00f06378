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

#include <cfloat>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "support.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/model.hpp"
#include "vocalhf/rng.hpp"

using namespace vocalhf;
using model::Hyper;
using model::Penalty;
using model::Rows;

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

struct Data {
  Rows x;
  std::vector<int> y;
  std::vector<std::string> names;
};

// n rows of p standard normal features; label from a noisy linear score.
Data make_data(std::size_t n, std::size_t p, double signal, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  for (std::size_t j = 0; j < p; ++j) d.names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(p);
    for (auto& v : row) v = rng.normal();
    const double score = signal * row[0] + rng.normal();
    d.y.push_back(score > 0.0 ? 1 : 0);
    d.x.push_back(row);
  }
  return d;
}

double accuracy(const model::LogisticModel& m, const Data& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.x.size(); ++i) ok += m.classify(d.x[i]) == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.x.size());
}

model::LogisticModel identity_model(std::vector<double> theta, double theta0) {
  model::LogisticModel m;
  m.theta0 = theta0;
  m.theta = std::move(theta);
  for (std::size_t j = 0; j < m.theta.size(); ++j) {
    m.feature_names.push_back("f" + std::to_string(j));
    m.scaler.means.push_back(0.0);
    m.scaler.stds.push_back(1.0);
    m.scaler.frozen.push_back(false);
  }
  return m;
}

}  // namespace

TEST_CASE("scaler") {
  const Rows rows{{0.0, 3.0}, {10.0, 3.0}};
  const auto s = model::Scaler::fit(rows);
  CHECK(s.means[0] == 5.0);
  CHECK(s.stds[0] == 5.0);
  const std::vector<double> r{10.0, 3.0};
  const auto z = s.apply(r);
  CHECK(z[0] == 1.0);
  CHECK(s.frozen[1]);
  CHECK_FALSE(s.frozen[0]);
  CHECK(z[1] == 0.0);
  CHECK(s.apply(Rows{{0.0, 99.0}})[0][1] == 0.0);
  CHECK(code_of([] { model::Scaler::fit(Rows{{1.0}}); }) == Errc::DegenerateInput);
}

TEST_CASE("separable data gives finite weights") {
  Data d;
  d.names = {"x"};
  for (int i = 0; i < 20; ++i) {
    d.x.push_back({static_cast<double>(i)});
    d.y.push_back(i >= 10 ? 1 : 0);
  }
  const auto m = model::fit(d.x, d.y, d.names, Hyper{});
  CHECK(accuracy(m, d) == 1.0);
  CHECK(std::abs(m.theta[0]) < 50.0);
  CHECK(std::isfinite(m.theta0));
  CHECK(m.train_meta.converged);
}

TEST_CASE("null data stays near zero") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CAPTURE(seed);
    auto d = make_data(100, 3, 0.0, 50 + seed);
    Rng rng(seed);
    rng.shuffle(d.y);
    const auto m = model::fit(d.x, d.y, d.names, Hyper{});
    CHECK(accuracy(m, d) <= 0.7);
    for (double t : m.theta) CHECK(std::abs(t) <= 0.5);
  }
}

TEST_CASE("mirrored data mirrors the solution") {
  for (auto penalty : {Penalty::L2, Penalty::L1}) {
    const auto d = make_data(60, 4, 1.0, 3);
    Data neg_x = d, flip_y = d, both = d;
    for (auto* m : {&neg_x, &both}) {
      for (auto& row : m->x) {
        for (auto& v : row) v = -v;
      }
    }
    for (auto* m : {&flip_y, &both}) {
      for (auto& l : m->y) l = 1 - l;
    }
    Hyper h;
    h.penalty = penalty;
    const auto a = model::fit(d.x, d.y, d.names, h);
    const auto b = model::fit(neg_x.x, neg_x.y, d.names, h);
    const auto c = model::fit(flip_y.x, flip_y.y, d.names, h);
    const auto e = model::fit(both.x, both.y, d.names, h);
    CHECK(std::abs(a.theta0 - b.theta0) <= 1e-8);
    CHECK(std::abs(a.theta0 + c.theta0) <= 1e-8);
    CHECK(std::abs(a.theta0 + e.theta0) <= 1e-8);
    for (std::size_t j = 0; j < a.theta.size(); ++j) {
      CHECK(std::abs(a.theta[j] + b.theta[j]) <= 1e-8);
      CHECK(std::abs(a.theta[j] + c.theta[j]) <= 1e-8);
      CHECK(std::abs(a.theta[j] - e.theta[j]) <= 1e-8);
    }
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    const auto d = make_data(15 + rng.below(30), 1 + rng.below(6), 1.0, 100 + trial);
    const double C = 0.05 + rng.uniform();
    std::vector<double> theta(d.names.size());
    for (auto& t : theta) t = rng.normal();
    const double theta0 = rng.normal();
    const auto g = model::loss_and_gradient(d.x, d.y, theta0, theta, C);
    CHECK(g.value == doctest::Approx(model::objective(d.x, d.y, theta0, theta, C, Penalty::L2)));
    const double h = 1e-6;
    std::vector<double> analytic{g.d_theta0};
    analytic.insert(analytic.end(), g.d_theta.begin(), g.d_theta.end());
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      auto tp = theta, tm = theta;
      double b0p = theta0, b0m = theta0;
      if (k == 0) {
        b0p += h;
        b0m -= h;
      } else {
        tp[k - 1] += h;
        tm[k - 1] -= h;
      }
      const double fd = (model::loss_and_gradient(d.x, d.y, b0p, tp, C).value -
                         model::loss_and_gradient(d.x, d.y, b0m, tm, C).value) /
                        (2.0 * h);
      CHECK(std::abs(fd - analytic[k]) <= 1e-5 * std::max(1.0, std::abs(analytic[k])));
    }
  }
}

TEST_CASE("data term at zero weights") {
  const auto d = make_data(40, 3, 0.0, 1);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  const std::vector<double> zero(3, 0.0);
  const double C = 0.7;
  CHECK(model::loss_and_gradient(d.x, y, 0.0, zero, C).value == doctest::Approx(C * 40 * std::log(2.0)));
  CHECK(model::objective(d.x, y, 0.0, zero, C, Penalty::L1) == doctest::Approx(C * 40 * std::log(2.0)));
}

TEST_CASE("objective trace never increases") {
  for (auto penalty : {Penalty::L2, Penalty::L1}) {
    const auto d = make_data(80, 6, 1.5, 9);
    const auto s = model::Scaler::fit(d.x).apply(d.x);
    const auto sol = penalty == Penalty::L2 ? model::solve_l2(s, d.y, 0.5, 1e-10, 1000)
                                            : model::solve_l1(s, d.y, 0.5, 1e-10, 1000);
    CHECK(sol.converged);
    REQUIRE(sol.objective_trace.size() >= 2);
    for (std::size_t k = 1; k < sol.objective_trace.size(); ++k) {
      CHECK(sol.objective_trace[k] <= sol.objective_trace[k - 1]);
    }
    CHECK(sol.final_objective == sol.objective_trace.back());
  }
}

TEST_CASE("L2 optimum is unique") {
  const auto d = make_data(50, 5, 1.0, 21);
  const auto s = model::Scaler::fit(d.x).apply(d.x);
  model::Init far;
  far.theta0 = 3.0;
  far.theta = {5.0, -4.0, 2.0, 7.0, -1.0};
  const auto a = model::solve_l2(s, d.y, 0.2, 1e-12, 1000);
  const auto b = model::solve_l2(s, d.y, 0.2, 1e-12, 1000, far);
  CHECK(std::abs(a.theta0 - b.theta0) <= 1e-6);
  for (std::size_t j = 0; j < a.theta.size(); ++j) CHECK(std::abs(a.theta[j] - b.theta[j]) <= 1e-6);
}

TEST_CASE("L1 zeroes weak features") {
  const auto d = make_data(60, 8, 2.0, 5);
  Hyper h;
  h.penalty = Penalty::L1;
  h.C = 0.2;
  const auto m = model::fit(d.x, d.y, d.names, h);
  std::size_t zeros = 0;
  for (std::size_t j = 1; j < m.theta.size(); ++j) zeros += m.theta[j] == 0.0;
  CHECK(zeros >= 4);
  CHECK(m.theta[0] > 0.0);
}

TEST_CASE("constant columns get no weight") {
  auto d = make_data(40, 3, 1.0, 2);
  for (auto& row : d.x) row[1] = 4.0;
  const auto m = model::fit(d.x, d.y, d.names, Hyper{});
  CHECK(m.scaler.frozen[1]);
  CHECK(m.theta[1] == 0.0);
}

TEST_CASE("fit errors") {
  auto d = make_data(10, 2, 1.0, 1);
  std::vector<int> ones(10, 1);
  CHECK(code_of([&] { model::fit(d.x, ones, d.names, Hyper{}); }) == Errc::SingleClass);
  std::vector<std::string> one_name{"a"};
  CHECK(code_of([&] { model::fit(d.x, d.y, one_name, Hyper{}); }) == Errc::DimensionMismatch);
  d.y[0] = 2;
  d.y[1] = 0;
  d.y[2] = 1;
  CHECK(code_of([&] { model::fit(d.x, d.y, d.names, Hyper{}); }) == Errc::LabelOutOfRange);
}

TEST_CASE("non-convergence is reported") {
  const auto d = make_data(60, 4, 1.0, 4);
  Hyper h;
  h.max_iter = 1;
  h.tol = 1e-14;
  CHECK(code_of([&] { model::fit(d.x, d.y, d.names, h); }) == Errc::NonConvergence);
}

TEST_CASE("acoustic predictor and classification") {
  const auto zero = identity_model({0.0, 0.0}, 0.0);
  const std::vector<double> row{3.0, -7.0};
  CHECK(zero.acoustic_predictor(row) == 0.0);
  CHECK(zero.predict_proba(row) == 0.5);
  CHECK(zero.classify(row) == 1);
  const auto one = identity_model({1.0}, 0.0);
  const std::vector<double> r{2.5};
  CHECK(one.acoustic_predictor(r) == 2.5);
  const std::vector<double> big{20.0};
  CHECK(one.predict_proba(big) > 0.999999);
  const auto rec = model::predict(one, "p7", r);
  CHECK(rec.patient_id == "p7");
  CHECK(rec.z == 2.5);
  CHECK(rec.label_hat == 1);
  CHECK(rec.to_json().at("label") == 1);
}

TEST_CASE("probabilities stay strictly inside the unit interval") {
  for (double z : {-1e6, -1000.0, -500.0, -40.0, 0.0, 40.0, 500.0, 1000.0, 1e6}) {
    CAPTURE(z);
    const double p = model::sigmoid(z);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  CHECK(model::sigmoid(0.0) == 0.5);
  CHECK(model::sigmoid(-1000.0) <= model::sigmoid(-40.0));
}

TEST_CASE("odds ratio report") {
  auto m = identity_model({0.39, 0.0}, 0.1);
  m.feature_names = {"clinical/nt_probnp", "other"};
  m.scaler.stds[0] = 9800.0;
  const auto r = model::odds_ratio_report(m, "clinical/nt_probnp");
  CHECK(r.odds_ratio_scaled == doctest::Approx(1.4770).epsilon(1e-4));
  CHECK(r.original_unit_delta == 9800.0);
  CHECK(r.sentence == "per 9800-unit increase in clinical/nt_probnp, odds ×1.477");
  CHECK(r.to_json().at("original_unit_delta_for_or") == 9800.0);
  CHECK(model::odds_ratio_report(m, "other").odds_ratio_scaled == 1.0);
  CHECK(code_of([&] { model::odds_ratio_report(m, "missing"); }) == Errc::UnknownFeature);
}

TEST_CASE("fitted odds ratio is per training standard deviation") {
  Rng rng(31);
  Data d;
  d.names = {"bnp"};
  for (int i = 0; i < 60; ++i) {
    const int label = i % 2;
    d.y.push_back(label);
    d.x.push_back({12000.0 + 9800.0 * ((2 * label - 1) * 0.5 + rng.normal())});
  }
  const auto m = model::fit(d.x, d.y, d.names, Hyper{});
  const auto r = model::odds_ratio_report(m, "bnp");
  CHECK(r.original_unit_delta == m.scaler.stds[0]);
  CHECK(r.odds_ratio_scaled == doctest::Approx(std::exp(m.theta[0])));
}

TEST_CASE("save and load round trip") {
  vocalhf::testing::TempDir dir;
  const auto d = make_data(50, 4, 1.0, 8);
  auto m = model::fit(d.x, d.y, d.names, Hyper{}, 42);
  m.imputation = {0.1, 0.2, 0.3, 0.4};
  model::save(m, dir / "m.json");
  const auto back = model::load(dir / "m.json");
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.train_meta.seed == 42);
  CHECK(back.imputation == m.imputation);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> row(4);
    for (auto& v : row) v = 3.0 * rng.normal();
    CHECK(back.acoustic_predictor(row) == m.acoustic_predictor(row));
    CHECK(back.predict_proba(row) == m.predict_proba(row));
  }
  CHECK(model::to_json(back).dump() == model::to_json(m).dump());
}

TEST_CASE("corrupt and future model files") {
  vocalhf::testing::TempDir dir;
  const auto d = make_data(30, 2, 1.0, 8);
  const auto m = model::fit(d.x, d.y, d.names, Hyper{});
  model::save(m, dir / "m.json");
  const auto text = vocalhf::testing::read_file(dir / "m.json");
  vocalhf::testing::write_file(dir / "cut.json", text.substr(0, text.size() / 2));
  CHECK(code_of([&] { model::load(dir / "cut.json"); }) == Errc::CorruptModel);
  auto j = model::to_json(m);
  j["schema_version"] = model::kModelSchemaVersion + 1;
  vocalhf::testing::write_file(dir / "future.json", j.dump());
  CHECK(code_of([&] { model::load(dir / "future.json"); }) == Errc::VersionMismatch);
  auto k = model::to_json(m);
  k.erase("theta");
  CHECK(code_of([&] { model::model_from_json(k); }) == Errc::CorruptModel);
}

TEST_CASE("column order does not change predictions") {
  const auto d = make_data(50, 3, 1.0, 17);
  const std::vector<std::size_t> perm{2, 0, 1};
  Data p;
  p.y = d.y;
  for (auto j : perm) p.names.push_back(d.names[j]);
  for (const auto& row : d.x) p.x.push_back({row[perm[0]], row[perm[1]], row[perm[2]]});
  const auto a = model::fit(d.x, d.y, d.names, Hyper{});
  const auto b = model::fit(p.x, p.y, p.names, Hyper{});
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    CHECK(a.acoustic_predictor(d.x[i]) == doctest::Approx(b.acoustic_predictor(p.x[i])).epsilon(1e-9));
  }
}

TEST_CASE("hyperparameter json") {
  Hyper h;
  h.C = 0.5;
  h.penalty = Penalty::L1;
  const auto back = Hyper::from_json(h.to_json());
  CHECK(back.C == 0.5);
  CHECK(back.penalty == Penalty::L1);
  CHECK(model::penalty_from_string("l2") == Penalty::L2);
  CHECK(code_of([] { model::penalty_from_string("elastic"); }) == Errc::InvalidConfig);
}

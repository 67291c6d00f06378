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
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "vocalhf/error.hpp"
#include "vocalhf/model.hpp"

namespace vocalhf::model {
namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_shapes(const Rows& x, std::span<const int> y, std::size_t p) {
  if (x.size() != y.size()) fail(Errc::DimensionMismatch, "row and label counts differ");
  for (const auto& r : x) {
    if (r.size() != p) fail(Errc::DimensionMismatch, "row width differs from the weight count");
  }
}

std::vector<double> margins(const Rows& x, double theta0, std::span<const double> theta) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = theta0;
    for (std::size_t j = 0; j < theta.size(); ++j) acc += theta[j] * x[i][j];
    z[i] = acc;
  }
  return z;
}

double data_term(const Rows& x, std::span<const int> y, double theta0, std::span<const double> theta) {
  const auto z = margins(x, theta0, theta);
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += softplus(z[i]) - y[i] * z[i];
  return acc;
}

double l1_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double t : v) acc += std::abs(t);
  return acc;
}

Init starting_point(const std::optional<Init>& init, std::size_t p) {
  Init s;
  s.theta.assign(p, 0.0);
  if (init) {
    if (init->theta.size() != p) fail(Errc::DimensionMismatch, "initial weights have the wrong length");
    s = *init;
  }
  return s;
}

}  // namespace

std::string_view to_string(Penalty p) { return p == Penalty::L1 ? "l1" : "l2"; }

Penalty penalty_from_string(std::string_view s) {
  if (s == "l1" || s == "L1") return Penalty::L1;
  if (s == "l2" || s == "L2") return Penalty::L2;
  fail(Errc::InvalidConfig, "penalty must be l1 or l2, got " + std::string(s));
}

double sigmoid(double z) {
  z = std::clamp(z, -500.0, 500.0);
  const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double objective(const Rows& x, std::span<const int> y, double theta0, std::span<const double> theta, double C,
                 Penalty penalty) {
  check_shapes(x, y, theta.size());
  double reg = 0.0;
  if (penalty == Penalty::L2) {
    for (double t : theta) reg += 0.5 * t * t;
  } else {
    reg = l1_norm(theta);
  }
  return reg + C * data_term(x, y, theta0, theta);
}

LossGradient loss_and_gradient(const Rows& x, std::span<const int> y, double theta0, std::span<const double> theta,
                               double C) {
  check_shapes(x, y, theta.size());
  LossGradient out;
  out.d_theta.assign(theta.begin(), theta.end());
  for (double t : theta) out.value += 0.5 * t * t;
  const auto z = margins(x, theta0, theta);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.value += C * (softplus(z[i]) - y[i] * z[i]);
    const double r = C * (sigmoid(z[i]) - y[i]);
    out.d_theta0 += r;
    for (std::size_t j = 0; j < theta.size(); ++j) out.d_theta[j] += r * x[i][j];
  }
  return out;
}

Solution solve_l2(const Rows& x, std::span<const int> y, double C, double tol, int max_iter,
                  const std::optional<Init>& init) {
  if (!(C > 0.0)) fail(Errc::InvalidConfig, "C must be positive");
  const std::size_t p = x.empty() ? (init ? init->theta.size() : 0) : x.front().size();
  check_shapes(x, y, p);
  auto s = starting_point(init, p);

  Solution sol;
  auto g = loss_and_gradient(x, y, s.theta0, s.theta, C);
  sol.objective_trace.push_back(g.value);
  const std::size_t dim = p + 1;
  for (int it = 0; it < max_iter; ++it) {
    double gmax = std::abs(g.d_theta0);
    for (double v : g.d_theta) gmax = std::max(gmax, std::abs(v));
    sol.optimality = gmax;
    if (gmax <= tol) {
      sol.converged = true;
      break;
    }
    // Hessian of the objective over (θ₀, θ).
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t j = 1; j < dim; ++j) h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
    const auto z = margins(x, s.theta0, s.theta);
    Eigen::VectorXd xi(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double pi = sigmoid(z[i]);
      const double w = C * pi * (1.0 - pi);
      xi(0) = 1.0;
      for (std::size_t j = 0; j < p; ++j) xi(static_cast<Eigen::Index>(j + 1)) = x[i][j];
      h.noalias() += w * xi * xi.transpose();
    }
    Eigen::VectorXd grad(static_cast<Eigen::Index>(dim));
    grad(0) = g.d_theta0;
    for (std::size_t j = 0; j < p; ++j) grad(static_cast<Eigen::Index>(j + 1)) = g.d_theta[j];
    Eigen::VectorXd step = h.ldlt().solve(-grad);
    if (!step.allFinite()) step = -grad;

    // Backtracking until the Armijo condition holds.
    const double slope = grad.dot(step);
    double t = 1.0;
    LossGradient next;
    double next0 = 0.0;
    std::vector<double> next_theta(p);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      next0 = s.theta0 + t * step(0);
      for (std::size_t j = 0; j < p; ++j) next_theta[j] = s.theta[j] + t * step(static_cast<Eigen::Index>(j + 1));
      next = loss_and_gradient(x, y, next0, next_theta, C);
      if (next.value <= g.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++sol.iterations;
    if (!accepted) break;
    s.theta0 = next0;
    s.theta = next_theta;
    g = std::move(next);
    sol.objective_trace.push_back(g.value);
  }
  if (!sol.converged) {
    double gmax = std::abs(g.d_theta0);
    for (double v : g.d_theta) gmax = std::max(gmax, std::abs(v));
    sol.optimality = gmax;
    sol.converged = gmax <= tol;
  }
  sol.theta0 = s.theta0;
  sol.theta = std::move(s.theta);
  sol.final_objective = g.value;
  return sol;
}

Solution solve_l1(const Rows& x, std::span<const int> y, double C, double tol, int max_iter,
                  const std::optional<Init>& init) {
  if (!(C > 0.0)) fail(Errc::InvalidConfig, "C must be positive");
  const std::size_t p = x.empty() ? (init ? init->theta.size() : 0) : x.front().size();
  check_shapes(x, y, p);
  const std::size_t n = x.size();
  auto s = starting_point(init, p);

  Solution sol;
  double obj = objective(x, y, s.theta0, s.theta, C, Penalty::L1);
  sol.objective_trace.push_back(obj);

  std::vector<double> w(n), grad(p), d(p), xd(n), next_theta(p);
  for (int it = 0; it < max_iter; ++it) {
    const auto z = margins(x, s.theta0, s.theta);
    double g0 = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double pi = sigmoid(z[i]);
      const double r = C * (pi - y[i]);
      w[i] = std::max(C * pi * (1.0 - pi), 1e-12 * C);
      g0 += r;
      for (std::size_t j = 0; j < p; ++j) grad[j] += r * x[i][j];
    }
    // Minimum-norm subgradient.
    double viol = std::abs(g0);
    for (std::size_t j = 0; j < p; ++j) {
      const double v = s.theta[j] != 0.0 ? std::abs(grad[j] + (s.theta[j] > 0.0 ? 1.0 : -1.0))
                                         : std::max(0.0, std::abs(grad[j]) - 1.0);
      viol = std::max(viol, v);
    }
    sol.optimality = viol;
    if (viol <= tol) {
      sol.converged = true;
      break;
    }

    // Coordinate descent on the local quadratic model plus the L1 term.
    std::vector<double> hdiag(p, 0.0);
    double h0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      h0 += w[i];
      for (std::size_t j = 0; j < p; ++j) hdiag[j] += w[i] * x[i][j] * x[i][j];
    }
    std::fill(d.begin(), d.end(), 0.0);
    std::fill(xd.begin(), xd.end(), 0.0);
    double d0 = 0.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
      double biggest = 0.0;
      {
        double q = g0;
        for (std::size_t i = 0; i < n; ++i) q += w[i] * xd[i];
        const double delta = -q / h0;
        d0 += delta;
        for (std::size_t i = 0; i < n; ++i) xd[i] += delta;
        biggest = std::max(biggest, std::abs(delta));
      }
      for (std::size_t j = 0; j < p; ++j) {
        if (!(hdiag[j] > 0.0)) continue;
        double q = grad[j];
        for (std::size_t i = 0; i < n; ++i) q += w[i] * x[i][j] * xd[i];
        const double cur = s.theta[j] + d[j];
        const double u = cur - q / hdiag[j];
        const double target = std::copysign(std::max(std::abs(u) - 1.0 / hdiag[j], 0.0), u);
        const double delta = target - cur;
        if (delta == 0.0) continue;
        d[j] += delta;
        for (std::size_t i = 0; i < n; ++i) xd[i] += delta * x[i][j];
        biggest = std::max(biggest, std::abs(delta));
      }
      if (biggest <= 1e-12) break;
    }

    // Backtracking on the true objective.
    double model_decrease = g0 * d0;
    for (std::size_t j = 0; j < p; ++j) model_decrease += grad[j] * d[j];
    for (std::size_t j = 0; j < p; ++j) next_theta[j] = s.theta[j] + d[j];
    model_decrease += l1_norm(next_theta) - l1_norm(s.theta);
    double t = 1.0;
    bool accepted = false;
    double next_obj = obj, next0 = s.theta0;
    for (int ls = 0; ls < 60; ++ls) {
      next0 = s.theta0 + t * d0;
      for (std::size_t j = 0; j < p; ++j) next_theta[j] = s.theta[j] + t * d[j];
      next_obj = objective(x, y, next0, next_theta, C, Penalty::L1);
      if (next_obj <= obj + 1e-4 * t * std::min(model_decrease, 0.0) && next_obj <= obj) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++sol.iterations;
    if (!accepted) break;
    s.theta0 = next0;
    s.theta = next_theta;
    obj = next_obj;
    sol.objective_trace.push_back(obj);
  }
  sol.theta0 = s.theta0;
  sol.theta = std::move(s.theta);
  sol.final_objective = obj;
  return sol;
}

double LogisticModel::acoustic_predictor(std::span<const double> raw_row) const {
  if (raw_row.size() != theta.size()) fail(Errc::DimensionMismatch, "row width differs from the model");
  const auto x = scaler.apply(raw_row);
  double z = theta0;
  for (std::size_t j = 0; j < x.size(); ++j) z += theta[j] * x[j];
  return z;
}

double LogisticModel::predict_proba(std::span<const double> raw_row) const {
  return sigmoid(acoustic_predictor(raw_row));
}

int LogisticModel::classify(std::span<const double> raw_row) const {
  return predict_proba(raw_row) >= decision_threshold ? 1 : 0;
}

LogisticModel fit(const Rows& rows, std::span<const int> labels, std::vector<std::string> names, const Hyper& hyper,
                  std::uint64_t seed, const std::optional<Init>& init) {
  if (rows.size() != labels.size()) fail(Errc::DimensionMismatch, "row and label counts differ");
  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) fail(Errc::SingleClass, "training labels hold a single class");
  for (int l : labels) {
    if (l != 0 && l != 1) fail(Errc::LabelOutOfRange, "labels must be 0 or 1");
  }
  if (!rows.empty() && rows.front().size() != names.size()) {
    fail(Errc::DimensionMismatch, "feature names do not match the row width");
  }

  LogisticModel m;
  m.scaler = Scaler::fit(rows);
  const auto x = m.scaler.apply(rows);
  const auto sol = hyper.penalty == Penalty::L2 ? solve_l2(x, labels, hyper.C, hyper.tol, hyper.max_iter, init)
                                                : solve_l1(x, labels, hyper.C, hyper.tol, hyper.max_iter, init);
  if (!sol.converged) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "logistic fit stopped after %d iterations, optimality %.3g", sol.iterations,
                  sol.optimality);
    fail(Errc::NonConvergence, buf);
  }
  m.theta0 = sol.theta0;
  m.theta = sol.theta;
  for (std::size_t j = 0; j < m.theta.size(); ++j) {
    if (m.scaler.frozen[j]) m.theta[j] = 0.0;
  }
  m.feature_names = std::move(names);
  m.hyper = hyper;
  m.train_meta = {rows.size(), seed, sol.converged, sol.final_objective, sol.iterations};
  return m;
}

PredictionRecord predict(const LogisticModel& m, std::string_view patient_id, std::span<const double> raw_row) {
  PredictionRecord r;
  r.patient_id = std::string(patient_id);
  r.z = m.acoustic_predictor(raw_row);
  r.p = sigmoid(r.z);
  r.label_hat = r.p >= m.decision_threshold ? 1 : 0;
  return r;
}

nlohmann::json PredictionRecord::to_json() const {
  return {{"patient_id", patient_id}, {"z", z}, {"p", p}, {"label", label_hat}};
}

OddsRatioReport odds_ratio_report(const LogisticModel& m, std::string_view feature) {
  const auto it = std::find(m.feature_names.begin(), m.feature_names.end(), feature);
  if (it == m.feature_names.end()) fail(Errc::UnknownFeature, "model has no feature " + std::string(feature));
  const auto j = static_cast<std::size_t>(it - m.feature_names.begin());
  OddsRatioReport r;
  r.feature = std::string(feature);
  r.coef_scaled = m.theta[j];
  r.odds_ratio_scaled = std::exp(r.coef_scaled);
  r.original_unit_delta = m.scaler.frozen[j] ? 0.0 : m.scaler.stds[j];
  char buf[256];
  std::snprintf(buf, sizeof buf, "per %g-unit increase in %s, odds ×%.3f", r.original_unit_delta, r.feature.c_str(),
                r.odds_ratio_scaled);
  r.sentence = buf;
  return r;
}

nlohmann::json OddsRatioReport::to_json() const {
  return {{"feature", feature},
          {"coef_scaled", coef_scaled},
          {"odds_ratio_scaled", odds_ratio_scaled},
          {"original_unit_delta_for_or", original_unit_delta},
          {"sentence", sentence}};
}

}  // namespace vocalhf::model

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


#include <cmath>
#include <cstdio>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"

namespace vocalhf::eval {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // sample variance
};

Moments moments(std::span<const double> v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string fmt_p(double p) { return p < 0.001 ? "<0.001" : fmt(p); }

std::string fmt_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

}  // namespace

TTest t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) fail(Errc::DegenerateGroups, "t-test needs two values per group");
  const auto ma = moments(a);
  const auto mb = moments(b);
  const double va = ma.var / static_cast<double>(a.size());
  const double vb = mb.var / static_cast<double>(b.size());
  const double se2 = va + vb;
  TTest r;
  if (!(se2 > 0.0)) {
    if (ma.mean != mb.mean) fail(Errc::DegenerateGroups, "both groups are constant with different means");
    r.dof = static_cast<double>(a.size() + b.size() - 2);
    return r;
  }
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.dof = se2 * se2 /
          (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  if (r.t == 0.0) return r;
  const boost::math::students_t dist(r.dof);
  r.p_two_sided = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

ChiSquare chi_square(const std::array<std::array<double, 2>, 2>& t) {
  const double rows[2] = {t[0][0] + t[0][1], t[1][0] + t[1][1]};
  const double cols[2] = {t[0][0] + t[1][0], t[0][1] + t[1][1]};
  for (const auto& r : t) {
    for (double v : r) {
      if (!(v >= 0.0)) fail(Errc::DegenerateGroups, "contingency counts must be non-negative");
    }
  }
  if (!(rows[0] > 0.0 && rows[1] > 0.0 && cols[0] > 0.0 && cols[1] > 0.0)) {
    fail(Errc::DegenerateGroups, "contingency table has an empty margin");
  }
  const double total = rows[0] + rows[1];
  ChiSquare r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = rows[i] * cols[j] / total;
      r.chi2 += (t[i][j] - e) * (t[i][j] - e) / e;
    }
  }
  const boost::math::chi_squared dist(1.0);
  r.p = boost::math::cdf(boost::math::complement(dist, r.chi2));
  return r;
}

std::vector<TableRow> cohort_table(const CohortTableInput& in) {
  const std::size_t n = in.labels.size();
  if (in.predictor.size() != n || (!in.nt_probnp.empty() && in.nt_probnp.size() != n) ||
      (!in.predicted.empty() && in.predicted.size() != n)) {
    fail(Errc::LengthMismatch, "cohort table inputs differ in length");
  }
  std::array<std::size_t, 2> sizes{};
  for (int l : in.labels) {
    if (l != 0 && l != 1) fail(Errc::LabelOutOfRange, "labels must be 0 or 1");
    ++sizes[l];
  }
  if (sizes[0] == 0 || sizes[1] == 0) fail(Errc::DegenerateGroups, "cohort table needs both groups");

  std::vector<TableRow> rows;
  TableRow count_row;
  count_row.variable = "N";
  count_row.categorical = true;
  count_row.n = sizes;
  count_row.count = sizes;
  for (int g = 0; g < 2; ++g) count_row.mean[g] = static_cast<double>(sizes[g]) / static_cast<double>(n);
  count_row.p = std::nan("");
  rows.push_back(count_row);

  const auto continuous = [&](const std::string& name, const std::vector<std::optional<double>>& v) {
    std::array<std::vector<double>, 2> groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] && std::isfinite(*v[i])) groups[in.labels[i]].push_back(*v[i]);
    }
    if (groups[0].size() < 2 || groups[1].size() < 2) return;
    TableRow r;
    r.variable = name;
    for (int g = 0; g < 2; ++g) {
      const auto m = moments(groups[g]);
      r.n[g] = groups[g].size();
      r.mean[g] = m.mean;
      r.sd[g] = std::sqrt(m.var);
    }
    r.p = t_test(groups[0], groups[1]).p_two_sided;
    rows.push_back(r);
  };
  std::vector<std::optional<double>> z(in.predictor.begin(), in.predictor.end());
  continuous("acoustic predictor", z);
  if (!in.nt_probnp.empty()) continuous("NT-proBNP", in.nt_probnp);

  if (!in.predicted.empty()) {
    TableRow r;
    r.variable = "predicted positive";
    r.categorical = true;
    std::array<std::array<double, 2>, 2> table{};
    for (std::size_t i = 0; i < n; ++i) table[in.labels[i]][in.predicted[i] == 1 ? 1 : 0] += 1.0;
    for (int g = 0; g < 2; ++g) {
      r.n[g] = sizes[g];
      r.count[g] = static_cast<std::size_t>(table[g][1]);
      r.mean[g] = table[g][1] / static_cast<double>(sizes[g]);
    }
    const bool margins = table[0][1] + table[1][1] > 0.0 && table[0][0] + table[1][0] > 0.0;
    r.p = margins ? chi_square(table).p : std::nan("");
    rows.push_back(r);
  }
  return rows;
}

std::string cohort_table_csv(std::span<const TableRow> rows) {
  std::string out = "variable,group0,group1,p\n";
  for (const auto& r : rows) {
    std::array<std::string, 2> cell;
    for (int g = 0; g < 2; ++g) {
      if (r.categorical) {
        cell[g] = "N=" + std::to_string(r.count[g]) + " (" + fmt_pct(r.mean[g]) + "%)";
      } else {
        cell[g] = fmt(r.mean[g]) + " ± " + fmt(r.sd[g]);
      }
    }
    out += r.variable + "," + cell[0] + "," + cell[1] + "," + (std::isnan(r.p) ? std::string() : fmt_p(r.p)) + "\n";
  }
  return out;
}

}  // namespace vocalhf::eval

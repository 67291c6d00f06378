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
#include <fstream>
#include <sstream>

#include "vocalhf/error.hpp"
#include "vocalhf/feature_matrix.hpp"
#include "vocalhf/parallel.hpp"

namespace vocalhf::features {
namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_value(std::string_view s, std::size_t line_no) {
  if (s == "nan" || s == "NaN") return kMissing;
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    fail(Errc::InvalidConfig, "feature CSV line " + std::to_string(line_no) + ": bad number '" + copy + "'");
  }
  return v;
}

}  // namespace

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][j];
  return out;
}

std::size_t FeatureMatrix::index_of(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(Errc::UnknownFeature, "no column named " + std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

FeatureMatrix FeatureMatrix::subset_rows(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.names = names;
  out.imputation = imputation;
  for (std::size_t i : idx) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
    out.patient_ids.push_back(patient_ids.at(i));
  }
  return out;
}

FeatureMatrix FeatureMatrix::subset_cols(std::span<const std::string> keep) const {
  std::vector<std::size_t> cols;
  for (const auto& n : keep) cols.push_back(index_of(n));
  FeatureMatrix out;
  out.names.assign(keep.begin(), keep.end());
  out.labels = labels;
  out.patient_ids = patient_ids;
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (std::size_t j : cols) row.push_back(r[j]);
    out.rows.push_back(std::move(row));
  }
  if (!imputation.empty()) {
    for (std::size_t j : cols) out.imputation.push_back(imputation[j]);
  }
  return out;
}

bool FeatureMatrix::has_missing() const {
  for (const auto& r : rows) {
    for (double v : r) {
      if (std::isnan(v)) return true;
    }
  }
  return false;
}

FeatureMatrix extract_matrix(const audio::Cohort& cohort, const ExtractionConfig& cfg) {
  FeatureMatrix m;
  m.names = registry(cfg);
  m.rows.resize(cohort.size());
  parallel_for(cohort.size(), cfg.jobs,
               [&](std::size_t i) { m.rows[i] = extract_patient(cohort.patients[i], cfg); });
  for (const auto& p : cohort.patients) {
    m.labels.push_back(p.label);
    m.patient_ids.push_back(p.patient_id);
  }
  return m;
}

FeatureMatrix impute(FeatureMatrix m, std::span<const bool> train_mask) {
  if (!train_mask.empty() && train_mask.size() != m.n_rows()) {
    fail(Errc::LengthMismatch, "train mask length differs from the row count");
  }
  m.imputation.assign(m.n_cols(), 0.0);
  for (std::size_t j = 0; j < m.n_cols(); ++j) {
    std::vector<double> present;
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
      if ((train_mask.empty() || train_mask[i]) && !std::isnan(m.rows[i][j])) present.push_back(m.rows[i][j]);
    }
    m.imputation[j] = present.empty() ? 0.0 : median_of(std::move(present));
  }
  for (auto& r : m.rows) apply_imputation(r, m.imputation);
  return m;
}

void apply_imputation(std::span<double> row, std::span<const double> fill) {
  if (row.size() != fill.size()) fail(Errc::DimensionMismatch, "imputation width differs from the row");
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (std::isnan(row[j])) row[j] = fill[j];
  }
}

FeatureMatrix build_matrix(const audio::Cohort& cohort, const ExtractionConfig& cfg,
                           std::span<const bool> train_mask) {
  const bool has0 = std::any_of(cohort.patients.begin(), cohort.patients.end(), [](auto& p) { return p.label == 0; });
  const bool has1 = std::any_of(cohort.patients.begin(), cohort.patients.end(), [](auto& p) { return p.label == 1; });
  if (cohort.size() < 2 || !has0 || !has1) fail(Errc::SingleClassCohort, "cohort needs both labels");
  return impute(extract_matrix(cohort, cfg), train_mask);
}

FeatureMatrix append_clinical(FeatureMatrix m, std::string_view name, std::span<const double> values) {
  if (values.size() != m.n_rows()) fail(Errc::LengthMismatch, "clinical column length differs from the row count");
  for (double v : values) {
    if (!std::isfinite(v)) fail(Errc::DegenerateInput, "clinical values must be finite");
  }
  m.names.push_back("clinical/" + std::string(name));
  for (std::size_t i = 0; i < m.n_rows(); ++i) m.rows[i].push_back(values[i]);
  if (!m.imputation.empty()) m.imputation.push_back(0.0);
  return m;
}

FeatureMatrix remove_column(FeatureMatrix m, std::string_view name) {
  const std::size_t j = m.index_of(name);
  m.names.erase(m.names.begin() + static_cast<std::ptrdiff_t>(j));
  for (auto& r : m.rows) r.erase(r.begin() + static_cast<std::ptrdiff_t>(j));
  if (!m.imputation.empty()) m.imputation.erase(m.imputation.begin() + static_cast<std::ptrdiff_t>(j));
  return m;
}

std::string to_csv(const FeatureMatrix& m) {
  std::string out = "patient_id,label";
  for (const auto& n : m.names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    out += m.patient_ids[i] + "," + std::to_string(m.labels[i]);
    for (double v : m.rows[i]) out += "," + format_value(v);
    out += "\n";
  }
  return out;
}

void write_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::IoError, "cannot write " + path.string());
  f << to_csv(m);
  if (!f) fail(Errc::IoError, "write failed: " + path.string());
}

FeatureMatrix parse_csv(std::string_view text) {
  FeatureMatrix m;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_line(line);
    if (!header) {
      header = true;
      if (cells.size() < 2 || cells[0] != "patient_id" || cells[1] != "label") {
        fail(Errc::InvalidConfig, "feature CSV header must start with patient_id,label");
      }
      for (std::size_t c = 2; c < cells.size(); ++c) m.names.emplace_back(cells[c]);
      continue;
    }
    if (cells.size() != m.names.size() + 2) {
      fail(Errc::LengthMismatch, "feature CSV line " + std::to_string(line_no) + " has the wrong cell count");
    }
    m.patient_ids.emplace_back(cells[0]);
    const double label = parse_value(cells[1], line_no);
    if (label != 0.0 && label != 1.0) fail(Errc::LabelOutOfRange, "feature CSV label must be 0 or 1");
    m.labels.push_back(static_cast<int>(label));
    std::vector<double> row;
    row.reserve(m.names.size());
    for (std::size_t c = 2; c < cells.size(); ++c) row.push_back(parse_value(cells[c], line_no));
    m.rows.push_back(std::move(row));
  }
  if (!header) fail(Errc::InvalidConfig, "feature CSV is empty");
  return m;
}

FeatureMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace vocalhf::features

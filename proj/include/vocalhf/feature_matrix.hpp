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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vocalhf/audio.hpp"
#include "vocalhf/features.hpp"

namespace vocalhf::features {

enum class Family { Glottal, Phonation, Prosody };

std::string_view to_string(Family f);

/// Canonical feature name "SectionN.wav/<family>/<functional> <descriptor>".
/// Prosody names glue the functional to the descriptor ("skwtiltEvoiced")
/// and scalar prosody measures have an empty functional.
struct FeatureName {
  audio::SectionId section = audio::SectionId::Sentences;
  Family family = Family::Phonation;
  std::string functional;
  std::string descriptor;

  std::string str() const;
  /// Throws UnknownFeature when `name` is not in the grammar.
  static FeatureName parse(std::string_view name);

  friend bool operator==(const FeatureName&, const FeatureName&) = default;
};

struct ExtractionConfig {
  int analysis_rate = 16000;
  PhonationConfig phonation;
  GlottalConfig glottal;
  ProsodyConfig prosody;
  unsigned jobs = 1;  // not part of the result

  nlohmann::json to_json() const;
  static ExtractionConfig from_json(const nlohmann::json& j);
};

/// Sections each family is extracted from.
bool routed(Family family, audio::SectionId section);

/// Every feature name for the configuration, in a fixed order: sections
/// 1..4, then glottal, phonation, prosody, then descriptor, then functional.
std::vector<std::string> registry(const ExtractionConfig& cfg = {});

/// Feature vector of one patient in registry order. Sections without
/// usable voicing contribute kMissing.
std::vector<double> extract_patient(const audio::PatientRecord& record, const ExtractionConfig& cfg = {});

/// Patients in rows, features in columns.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> patient_ids;
  /// Per-column fill values from the last imputation (empty before).
  std::vector<double> imputation;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return names.size(); }
  std::vector<double> column(std::size_t j) const;
  /// Column index of `name`; throws UnknownFeature.
  std::size_t index_of(std::string_view name) const;
  /// Rows listed in `idx`, in that order; imputation values are kept.
  FeatureMatrix subset_rows(std::span<const std::size_t> idx) const;
  /// Columns named in `names`, in that order.
  FeatureMatrix subset_cols(std::span<const std::string> names) const;
  bool has_missing() const;
};

/// Feature vectors of every patient, sentinels left in place.
FeatureMatrix extract_matrix(const audio::Cohort& cohort, const ExtractionConfig& cfg = {});

/// Replaces sentinels column-wise by the median of the rows selected by
/// `train_mask` (all rows when empty). A column with no value among those
/// rows is filled with 0. Non-sentinel entries are never touched.
FeatureMatrix impute(FeatureMatrix m, std::span<const bool> train_mask = {});

/// Fills sentinels with previously recorded imputation values.
void apply_imputation(std::span<double> row, std::span<const double> fill);

/// extract_matrix followed by impute. Throws SingleClassCohort when the
/// cohort has fewer than two patients or one label only.
FeatureMatrix build_matrix(const audio::Cohort& cohort, const ExtractionConfig& cfg = {},
                           std::span<const bool> train_mask = {});

/// Appends the column "clinical/<name>".
FeatureMatrix append_clinical(FeatureMatrix m, std::string_view name, std::span<const double> values);
/// Drops the named column.
FeatureMatrix remove_column(FeatureMatrix m, std::string_view name);

/// CSV with header "patient_id,label,<names...>"; values printed with
/// %.17g, sentinels as "nan". Lines starting with "#" are skipped on read.
void write_csv(const FeatureMatrix& m, const std::filesystem::path& path);
std::string to_csv(const FeatureMatrix& m);
FeatureMatrix read_csv(const std::filesystem::path& path);
FeatureMatrix parse_csv(std::string_view text);

}  // namespace vocalhf::features

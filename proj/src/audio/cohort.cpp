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
#include <fstream>
#include <set>

#include <json.hpp>

#include "vocalhf/audio.hpp"
#include "vocalhf/error.hpp"

namespace vocalhf::audio {
namespace {

using nlohmann::json;

ManifestEntry parse_line(const json& obj, const std::filesystem::path& base, std::size_t line_no) {
  const std::string where = "manifest line " + std::to_string(line_no);
  if (!obj.is_object()) fail(Errc::CorruptHeader, where + ": expected a JSON object");

  ManifestEntry e;
  if (!obj.contains("patient_id") || !obj["patient_id"].is_string()) {
    fail(Errc::CorruptHeader, where + ": missing string patient_id");
  }
  e.patient_id = obj["patient_id"].get<std::string>();

  const json sections = obj.value("sections", json::object());
  for (SectionId s : kAllSections) {
    const std::string key = std::to_string(ordinal(s));
    if (!sections.is_object() || !sections.contains(key) || !sections[key].is_string()) {
      fail(Errc::MissingSection, "patient " + e.patient_id + " lacks Section" + key);
    }
    std::filesystem::path p = sections[key].get<std::string>();
    e.section_paths[ordinal(s) - 1] = p.is_absolute() ? p : base / p;
  }

  if (!obj.contains("label") || !obj["label"].is_number_integer()) {
    fail(Errc::LabelOutOfRange, "patient " + e.patient_id + ": label must be 0 or 1");
  }
  const auto label = obj["label"].get<long long>();
  if (label != 0 && label != 1) {
    fail(Errc::LabelOutOfRange,
         "patient " + e.patient_id + ": label must be 0 or 1, got " + std::to_string(label));
  }
  e.label = static_cast<int>(label);

  if (obj.contains("nt_probnp") && !obj["nt_probnp"].is_null()) {
    if (!obj["nt_probnp"].is_number()) {
      fail(Errc::CorruptHeader, "patient " + e.patient_id + ": nt_probnp must be a number or null");
    }
    const double v = obj["nt_probnp"].get<double>();
    if (!std::isfinite(v) || v < 0.0) {
      fail(Errc::CorruptHeader, "patient " + e.patient_id + ": nt_probnp must be finite and >= 0");
    }
    e.nt_probnp = v;
  }
  return e;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(Errc::IoError, "cannot open manifest " + manifest_path.string());
  const auto base = manifest_path.parent_path();

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(Errc::CorruptHeader, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry e = parse_line(obj, base, line_no);
    if (!seen.insert(e.patient_id).second) {
      fail(Errc::DuplicatePatientId, "duplicate patient_id " + e.patient_id);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& manifest_path,
                    std::span<const ManifestEntry> entries) {
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write manifest " + manifest_path.string());
  for (const auto& e : entries) {
    json sections = json::object();
    for (SectionId s : kAllSections) {
      sections[std::to_string(ordinal(s))] = e.section_paths[ordinal(s) - 1].generic_string();
    }
    json obj = json::object();
    obj["patient_id"] = e.patient_id;
    obj["sections"] = sections;
    obj["label"] = e.label;
    obj["nt_probnp"] = e.nt_probnp ? json(*e.nt_probnp) : json(nullptr);
    out << obj.dump() << '\n';
  }
  if (!out) fail(Errc::IoError, "short write to " + manifest_path.string());
}

Cohort load_cohort(const std::filesystem::path& manifest_path) {
  Cohort cohort;
  cohort.source_manifest = manifest_path.string();
  for (auto& entry : read_manifest(manifest_path)) {
    PatientRecord rec;
    rec.patient_id = entry.patient_id;
    rec.label = entry.label;
    rec.nt_probnp = entry.nt_probnp;
    for (SectionId s : kAllSections) {
      const auto& path = entry.section_paths[ordinal(s) - 1];
      if (!std::filesystem::exists(path)) {
        fail(Errc::MissingSection, "patient " + rec.patient_id + ": Section" +
                                       std::to_string(ordinal(s)) + " file not found: " +
                                       path.string());
      }
      rec.sections[ordinal(s) - 1] = load_wav(path, s);
    }
    cohort.patients.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace vocalhf::audio

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
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vocalhf/audio.hpp"
#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"
#include "vocalhf/feature_matrix.hpp"
#include "vocalhf/model.hpp"
#include "vocalhf/selection.hpp"
#include "vocalhf/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vocalhf;

namespace {

struct Options {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string config_path;
};

struct RunConfig {
  features::ExtractionConfig extraction;
  eval::PipelineConfig pipeline;

  json to_json() const { return {{"extraction", extraction.to_json()}, {"pipeline", pipeline.to_json()}}; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& p, Errc code) {
  try {
    return json::parse(slurp(p));
  } catch (const json::exception& e) {
    fail(code, p.string() + ": " + e.what());
  }
}

// Config file values first, then command-line flags.
RunConfig resolve(const Options& o) {
  RunConfig c;
  if (!o.config_path.empty()) {
    const auto j = parse_json_file(o.config_path, Errc::InvalidConfig);
    if (j.contains("extraction")) c.extraction = features::ExtractionConfig::from_json(j.at("extraction"));
    if (j.contains("pipeline")) c.pipeline = eval::PipelineConfig::from_json(j.at("pipeline"));
  }
  c.pipeline.seed = o.seed;
  c.pipeline.selection.seed = o.seed;
  c.pipeline.jobs = o.jobs;
  c.pipeline.selection.jobs = o.jobs;
  c.extraction.jobs = o.jobs;
  return c;
}

json meta(const std::string& command, const Options& o, const RunConfig& c) {
  return {{"tool", "vocalhf"}, {"version", VOCALHF_VERSION}, {"command", command}, {"seed", o.seed},
          {"config", c.to_json()}};
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) fail(Errc::IoError, "cannot write " + out);
  f << text;
  if (!f) fail(Errc::IoError, "write failed for " + out);
}

void emit_json(const std::string& out, const json& j) { emit(out, j.dump(2) + "\n"); }

std::string clinical_column(const std::string& name) { return "clinical/" + name; }

features::FeatureMatrix matrix_from_manifest(const fs::path& manifest, const RunConfig& c,
                                             const std::vector<std::string>& clinical) {
  const auto cohort = audio::load_cohort(manifest);
  auto m = features::extract_matrix(cohort, c.extraction);
  for (const auto& name : clinical) {
    if (name != "nt_probnp") fail(Errc::UnknownFeature, "manifest carries no clinical field " + name);
    std::vector<double> v;
    for (const auto& p : cohort.patients) {
      if (!p.nt_probnp) fail(Errc::DegenerateInput, "patient " + p.patient_id + " has no nt_probnp");
      v.push_back(*p.nt_probnp);
    }
    m = features::append_clinical(std::move(m), name, v);
  }
  return m;
}

// Keeps exactly the requested clinical columns.
features::FeatureMatrix with_clinical(features::FeatureMatrix m, const std::vector<std::string>& clinical) {
  for (const auto& name : clinical) m.index_of(clinical_column(name));
  std::vector<std::string> keep;
  for (const auto& n : m.names) {
    if (!eval::is_clinical(n) ||
        std::find_if(clinical.begin(), clinical.end(), [&](const std::string& c) { return clinical_column(c) == n; }) !=
            clinical.end()) {
      keep.push_back(n);
    }
  }
  return m.subset_cols(keep);
}

features::FeatureMatrix load_matrix(const std::string& matrix, const std::string& manifest, const RunConfig& c,
                                    const std::vector<std::string>& clinical) {
  if (matrix.empty() == manifest.empty()) fail(Errc::InvalidConfig, "give exactly one of --matrix or --manifest");
  if (!manifest.empty()) return matrix_from_manifest(manifest, c, clinical);
  return with_clinical(features::read_csv(matrix), clinical);
}

json predictions_json(std::span<const model::PredictionRecord> recs) {
  json a = json::array();
  for (const auto& r : recs) a.push_back(r.to_json());
  return a;
}

struct LoadedPipeline {
  std::vector<std::string> input_names;
  model::LogisticModel model;
  json config;
};

LoadedPipeline load_pipeline(const fs::path& path) {
  const auto j = parse_json_file(path, Errc::CorruptModel);
  if (!j.is_object() || !j.contains("pipeline") || !j.contains("meta")) {
    fail(Errc::CorruptModel, path.string() + " is not a trained pipeline");
  }
  LoadedPipeline p;
  try {
    p.input_names = j.at("pipeline").at("input_names").get<std::vector<std::string>>();
    p.config = j.at("meta").at("config");
  } catch (const json::exception& e) {
    fail(Errc::CorruptModel, e.what());
  }
  p.model = model::model_from_json(j.at("pipeline").at("model"));
  return p;
}

eval::TrainedPipeline as_pipeline(const LoadedPipeline& l) {
  eval::TrainedPipeline p;
  p.input_names = l.input_names;
  p.model = l.model;
  return p;
}

// ---- subcommands ----

void cmd_extract(const Options& o, const std::string& manifest, const std::string& out,
                 const std::vector<std::string>& clinical) {
  const auto c = resolve(o);
  const auto m = matrix_from_manifest(manifest, c, clinical);
  emit(out, "# " + meta("extract", o, c).dump() + "\n" + features::to_csv(m));
}

void cmd_select(const Options& o, const std::string& matrix, const std::string& out) {
  const auto c = resolve(o);
  const auto m = eval::acoustic_view(features::read_csv(matrix));
  const auto rep = selection::select(m, c.pipeline.selection);
  json j = rep.to_json();
  j["meta"] = meta("select", o, c);
  emit_json(out, j);
}

void cmd_train(const Options& o, const std::string& matrix, const std::string& out,
               const std::vector<std::string>& clinical, bool holdout) {
  auto c = resolve(o);
  const auto m = with_clinical(features::read_csv(matrix), clinical);
  json j;
  auto use = c.pipeline;
  if (c.pipeline.grid) {
    const auto gr = eval::grid_search(m, *c.pipeline.grid, c.pipeline);
    j["grid"] = gr.to_json();
    use = c.pipeline.at(gr.best);
  }
  const auto p = eval::fit_pipeline(m, use);
  std::vector<model::PredictionRecord> preds;
  std::vector<int> labels_hat;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    preds.push_back(p.predict(m.patient_ids[i], m.rows[i]));
    labels_hat.push_back(preds.back().label_hat);
  }
  j["meta"] = meta("train", o, c);
  j["pipeline"] = p.to_json();
  j["train_metrics"] = eval::metrics_from(m.labels, labels_hat).to_json();
  j["train_predictions"] = predictions_json(preds);
  json odds = json::array();
  for (const auto& name : p.model.feature_names) odds.push_back(model::odds_ratio_report(p.model, name).to_json());
  j["odds_ratios"] = odds;
  if (holdout) j["holdout"] = eval::holdout(m, c.pipeline).to_json();
  emit_json(out, j);
}

void cmd_evaluate(const Options& o, const std::string& model_path, const std::string& matrix, const std::string& out) {
  const auto c = resolve(o);
  const auto p = as_pipeline(load_pipeline(model_path));
  const auto m = features::read_csv(matrix);
  std::vector<double> row(p.input_names.size());
  std::vector<int> hat;
  std::vector<model::PredictionRecord> preds;
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    for (std::size_t k = 0; k < p.input_names.size(); ++k) {
      const auto& name = p.input_names[k];
      const bool used = std::find(p.model.feature_names.begin(), p.model.feature_names.end(), name) !=
                        p.model.feature_names.end();
      row[k] = used ? m.rows[i][m.index_of(name)] : features::kMissing;
    }
    preds.push_back(p.predict(m.patient_ids[i], row));
    hat.push_back(preds.back().label_hat);
  }
  json j = {{"meta", meta("evaluate", o, c)},
            {"metrics", eval::metrics_from(m.labels, hat).to_json()},
            {"predictions", predictions_json(preds)}};
  emit_json(out, j);
}

void cmd_loocv(const Options& o, const std::string& matrix, const std::string& manifest, const std::string& out,
               const std::vector<std::string>& clinical, bool grid, bool leaky) {
  auto c = resolve(o);
  if (grid && !c.pipeline.grid) c.pipeline.grid = eval::Grid::default_grid();
  if (leaky) c.pipeline.leaky = true;
  const auto m = load_matrix(matrix, manifest, c, clinical);
  const auto s = eval::loocv(m, c.pipeline);
  json j = s.to_json();
  std::vector<model::PredictionRecord> pooled;
  for (const auto& f : s.folds) pooled.insert(pooled.end(), f.predictions.begin(), f.predictions.end());
  j["predictions"] = predictions_json(pooled);
  j["meta"] = meta("loocv", o, c);
  emit_json(out, j);
}

void cmd_predict(const Options& o, const std::string& model_path, const std::vector<std::string>& wavs,
                 const std::string& id, std::optional<double> nt_probnp, const std::string& out) {
  const auto loaded = load_pipeline(model_path);
  const auto p = as_pipeline(loaded);
  RunConfig c = resolve(o);
  if (loaded.config.contains("extraction")) {
    c.extraction = features::ExtractionConfig::from_json(loaded.config.at("extraction"));
    c.extraction.jobs = o.jobs;
  }
  if (wavs.size() != 4) fail(Errc::MissingSection, "predict needs four section WAVs");
  audio::PatientRecord rec;
  rec.patient_id = id;
  rec.nt_probnp = nt_probnp;
  for (audio::SectionId s : audio::kAllSections) {
    rec.sections[audio::ordinal(s) - 1] = audio::load_wav(wavs[audio::ordinal(s) - 1], s);
  }
  const auto names = features::registry(c.extraction);
  const auto values = features::extract_patient(rec, c.extraction);
  std::vector<double> row;
  for (const auto& name : p.input_names) {
    if (name == clinical_column("nt_probnp")) {
      row.push_back(nt_probnp ? *nt_probnp : features::kMissing);
      continue;
    }
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) fail(Errc::UnknownFeature, "cannot compute model input " + name);
    row.push_back(values[static_cast<std::size_t>(it - names.begin())]);
  }
  json j = p.predict(id, row).to_json();
  j["meta"] = meta("predict", o, c);
  emit_json(out, j);
}

void cmd_synth(const Options& o, const std::string& spec_path, const std::string& out_dir, int n) {
  synth::CohortSpec spec;
  if (!spec_path.empty()) spec = synth::cohort_spec_from_json(slurp(spec_path));
  spec.seed = o.seed;
  if (n > 0) spec.n_patients = n;
  spec.validate();
  const auto manifest = synth::write_cohort(spec, out_dir);
  const auto c = resolve(o);
  json j = {{"meta", meta("synth", o, c)},
            {"cohort_spec", json::parse(synth::cohort_spec_to_json(spec))},
            {"manifest", manifest.filename().string()}};
  emit_json((fs::path(out_dir) / "cohort.json").string(), j);
}

void cmd_stats(const Options& o, const std::string& manifest, const std::string& predictions,
               const std::string& out) {
  const auto c = resolve(o);
  const auto entries = audio::read_manifest(manifest);
  const auto pj = parse_json_file(predictions, Errc::InvalidConfig);
  const json& arr = pj.is_array() ? pj : pj.value("predictions", json::array());
  std::map<std::string, std::pair<double, int>> by_id;
  for (const auto& r : arr) by_id[r.at("patient_id").get<std::string>()] = {r.at("z").get<double>(), r.at("label").get<int>()};

  eval::CohortTableInput in;
  bool any_bnp = false;
  for (const auto& e : entries) {
    const auto it = by_id.find(e.patient_id);
    if (it == by_id.end()) fail(Errc::LengthMismatch, "no prediction for patient " + e.patient_id);
    in.labels.push_back(e.label);
    in.predictor.push_back(it->second.first);
    in.predicted.push_back(it->second.second);
    in.nt_probnp.push_back(e.nt_probnp);
    any_bnp = any_bnp || e.nt_probnp.has_value();
  }
  if (!any_bnp) in.nt_probnp.clear();
  const auto rows = eval::cohort_table(in);
  emit(out, "# " + meta("stats", o, c).dump() + "\n" + eval::cohort_table_csv(rows));
}

int report(const Error& e) {
  std::cerr << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voice biomarker toolkit for heart-failure risk screening"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--config", o.config_path, "JSON config with \"extraction\" and \"pipeline\" objects")
      ->check(CLI::ExistingFile);

  std::string manifest, matrix, out, model_path, spec_path, predictions, id = "patient";
  std::vector<std::string> clinical, wavs;
  bool holdout = false, grid = false, leaky = false;
  double nt_probnp = NAN;
  int n_patients = 0;

  auto* extract = app.add_subcommand("extract", "Cohort manifest to feature-matrix CSV");
  extract->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out, "Output path (stdout when absent)");
  extract->add_option("--clinical", clinical, "Clinical fields to append (nt_probnp)");

  auto* select = app.add_subcommand("select", "Feature selection report");
  select->add_option("--matrix", matrix)->required()->check(CLI::ExistingFile);
  select->add_option("--out", out);

  auto* train = app.add_subcommand("train", "Fit the pipeline on every row");
  train->add_option("--matrix", matrix)->required()->check(CLI::ExistingFile);
  train->add_option("--out", out);
  train->add_option("--clinical", clinical, "Clinical columns to fuse (nt_probnp)");
  train->add_flag("--holdout", holdout, "Also report a stratified train/test evaluation");

  auto* evaluate = app.add_subcommand("evaluate", "Score a trained pipeline on a matrix");
  evaluate->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--matrix", matrix)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out);

  auto* loocv = app.add_subcommand("loocv", "Leave-one-out cross-validation");
  loocv->add_option("--matrix", matrix)->check(CLI::ExistingFile);
  loocv->add_option("--manifest", manifest)->check(CLI::ExistingFile);
  loocv->add_option("--out", out);
  loocv->add_option("--clinical", clinical, "Clinical columns to fuse (nt_probnp)");
  loocv->add_flag("--grid", grid, "Nested search over the default grid in every fold");
  loocv->add_flag("--leaky", leaky, "Select features once on the whole cohort");

  auto* predict = app.add_subcommand("predict", "Acoustic predictor for one patient");
  predict->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  predict->add_option("--wav", wavs, "Section1..Section4 WAV files, in order")->required()->expected(4)
      ->check(CLI::ExistingFile);
  predict->add_option("--id", id);
  predict->add_option("--nt-probnp", nt_probnp);
  predict->add_option("--out", out);

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic cohort");
  synth_cmd->add_option("--spec", spec_path, "CohortSpec JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", out)->required();
  synth_cmd->add_option("--n", n_patients, "Override the patient count");

  auto* stats = app.add_subcommand("stats", "Two-group cohort table");
  stats->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  stats->add_option("--predictions", predictions, "JSON with a \"predictions\" array")->required()
      ->check(CLI::ExistingFile);
  stats->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*extract) cmd_extract(o, manifest, out, clinical);
    if (*select) cmd_select(o, matrix, out);
    if (*train) cmd_train(o, matrix, out, clinical, holdout);
    if (*evaluate) cmd_evaluate(o, model_path, matrix, out);
    if (*loocv) cmd_loocv(o, matrix, manifest, out, clinical, grid, leaky);
    if (*predict) {
      cmd_predict(o, model_path, wavs, id, std::isnan(nt_probnp) ? std::nullopt : std::optional<double>(nt_probnp),
                  out);
    }
    if (*synth_cmd) cmd_synth(o, spec_path, out, n_patients);
    if (*stats) cmd_stats(o, manifest, predictions, out);
  } catch (const Error& e) {
    return report(e);
  } catch (const json::exception& e) {
    return report(Error(Errc::InvalidConfig, e.what()));
  } catch (const std::exception& e) {
    return report(Error(Errc::IoError, e.what()));
  }
  return 0;
}

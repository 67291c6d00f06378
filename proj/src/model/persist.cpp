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
#include <sstream>

#include "vocalhf/error.hpp"
#include "vocalhf/model.hpp"

namespace vocalhf::model {
namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(Errc::CorruptModel, std::string("model file lacks \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::CorruptModel, std::string("bad \"") + key + "\": " + e.what());
  }
}

}  // namespace

nlohmann::json Hyper::to_json() const {
  return {{"C", C}, {"penalty", std::string(model::to_string(penalty))}, {"tol", tol}, {"max_iter", max_iter}};
}

Hyper Hyper::from_json(const nlohmann::json& j) {
  Hyper h;
  if (!j.is_object()) fail(Errc::InvalidConfig, "hyperparameters must be an object");
  if (j.contains("C")) h.C = j.at("C").get<double>();
  if (j.contains("penalty")) h.penalty = penalty_from_string(j.at("penalty").get<std::string>());
  if (j.contains("tol")) h.tol = j.at("tol").get<double>();
  if (j.contains("max_iter")) h.max_iter = j.at("max_iter").get<int>();
  if (!(h.C > 0.0)) fail(Errc::InvalidConfig, "C must be positive");
  if (!(h.tol > 0.0) || h.max_iter < 1) fail(Errc::InvalidConfig, "tol and max_iter must be positive");
  return h;
}

nlohmann::json to_json(const LogisticModel& m) {
  nlohmann::json frozen = nlohmann::json::array();
  for (bool f : m.scaler.frozen) frozen.push_back(f);
  return {{"schema_version", kModelSchemaVersion},
          {"feature_names", m.feature_names},
          {"theta0", m.theta0},
          {"theta", m.theta},
          {"scaler", {{"means", m.scaler.means}, {"stds", m.scaler.stds}, {"frozen", frozen}}},
          {"hyper", m.hyper.to_json()},
          {"decision_threshold", m.decision_threshold},
          {"imputation", m.imputation},
          {"train_meta",
           {{"n_train", m.train_meta.n_train},
            {"seed", m.train_meta.seed},
            {"converged", m.train_meta.converged},
            {"final_objective", m.train_meta.final_objective},
            {"iterations", m.train_meta.iterations}}}};
}

LogisticModel model_from_json(const nlohmann::json& j) {
  const int version = field<int>(j, "schema_version");
  if (version != kModelSchemaVersion) {
    fail(Errc::VersionMismatch, "model schema version " + std::to_string(version) + " is not supported");
  }
  LogisticModel m;
  m.feature_names = field<std::vector<std::string>>(j, "feature_names");
  m.theta0 = field<double>(j, "theta0");
  m.theta = field<std::vector<double>>(j, "theta");
  const auto sc = field<nlohmann::json>(j, "scaler");
  m.scaler.means = field<std::vector<double>>(sc, "means");
  m.scaler.stds = field<std::vector<double>>(sc, "stds");
  m.scaler.frozen = field<std::vector<bool>>(sc, "frozen");
  try {
    m.hyper = Hyper::from_json(field<nlohmann::json>(j, "hyper"));
  } catch (const Error& e) {
    fail(Errc::CorruptModel, e.what());
  }
  m.decision_threshold = field<double>(j, "decision_threshold");
  if (j.contains("imputation")) m.imputation = field<std::vector<double>>(j, "imputation");
  const auto meta = field<nlohmann::json>(j, "train_meta");
  m.train_meta.n_train = field<std::size_t>(meta, "n_train");
  m.train_meta.seed = field<std::uint64_t>(meta, "seed");
  m.train_meta.converged = field<bool>(meta, "converged");
  m.train_meta.final_objective = field<double>(meta, "final_objective");
  m.train_meta.iterations = field<int>(meta, "iterations");

  const std::size_t p = m.feature_names.size();
  if (m.theta.size() != p || m.scaler.means.size() != p || m.scaler.stds.size() != p || m.scaler.frozen.size() != p ||
      (!m.imputation.empty() && m.imputation.size() != p)) {
    fail(Errc::CorruptModel, "model arrays disagree in length");
  }
  for (std::size_t k = 0; k < p; ++k) {
    if (!std::isfinite(m.theta[k]) || !(m.scaler.stds[k] > 0.0)) fail(Errc::CorruptModel, "non-finite model values");
  }
  return m;
}

void save(const LogisticModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << to_json(m).dump(2) << '\n';
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

LogisticModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::CorruptModel, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace vocalhf::model

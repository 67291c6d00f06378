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


#include "vocalhf/error.hpp"
#include "vocalhf/eval.hpp"

namespace vocalhf::eval {

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

Metrics metrics_from(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  if (c.total() > 0) m.accuracy = d(c.tp + c.tn) / d(c.total());
  if (c.tp + c.fp > 0) {
    m.precision = d(c.tp) / d(c.tp + c.fp);
  } else {
    m.precision_undefined = true;
  }
  if (c.tp + c.fn > 0) {
    m.recall = d(c.tp) / d(c.tp + c.fn);
  } else {
    m.recall_undefined = true;
  }
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

Metrics metrics_from(std::span<const int> labels, std::span<const int> predicted) {
  if (labels.size() != predicted.size()) fail(Errc::LengthMismatch, "labels and predictions differ in length");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++(predicted[i] == 1 ? c.tp : c.fn);
    } else {
      ++(predicted[i] == 1 ? c.fp : c.tn);
    }
  }
  return metrics_from(c);
}

Metrics evaluate(const model::LogisticModel& m, const model::Rows& raw_rows, std::span<const int> labels) {
  if (raw_rows.size() != labels.size()) fail(Errc::LengthMismatch, "rows and labels differ in length");
  std::vector<int> predicted;
  predicted.reserve(raw_rows.size());
  for (const auto& r : raw_rows) predicted.push_back(m.classify(r));
  return metrics_from(labels, predicted);
}

nlohmann::json Metrics::to_json() const {
  return {{"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"precision_undefined", precision_undefined},
          {"recall_undefined", recall_undefined},
          {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}}}};
}

}  // namespace vocalhf::eval

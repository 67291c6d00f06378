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

namespace vocalhf {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptHeader: return "CorruptHeader";
    case Errc::EmptyAudio: return "EmptyAudio";
    case Errc::InvalidRate: return "InvalidRate";
    case Errc::MissingSection: return "MissingSection";
    case Errc::DuplicatePatientId: return "DuplicatePatientId";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::InvalidBand: return "InvalidBand";
    case Errc::DegenerateFrame: return "DegenerateFrame";
    case Errc::DegenerateAbscissa: return "DegenerateAbscissa";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::TooFewCycles: return "TooFewCycles";
    case Errc::InvalidAmplitude: return "InvalidAmplitude";
    case Errc::InsufficientVoicing: return "InsufficientVoicing";
    case Errc::WrongSection: return "WrongSection";
    case Errc::SingleClassCohort: return "SingleClassCohort";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::TooFewSurvivors: return "TooFewSurvivors";
    case Errc::SingleClass: return "SingleClass";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnknownFeature: return "UnknownFeature";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptModel: return "CorruptModel";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::InfeasibleFolds: return "InfeasibleFolds";
    case Errc::DegenerateGroups: return "DegenerateGroups";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace vocalhf

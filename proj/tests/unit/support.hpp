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

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vocalhf/audio.hpp"
#include "vocalhf/feature_matrix.hpp"
#include "vocalhf/rng.hpp"

namespace vocalhf::testing {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("vocalhf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline audio::AudioSegment sine(int rate, double freq, double seconds, double amp,
                                audio::SectionId section = audio::SectionId::VowelA) {
  audio::AudioSegment s;
  s.sample_rate = rate;
  s.section = section;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  }
  return s;
}

/// n rows, `signal` informative columns (class means differ by `effect`
/// standard deviations) followed by `noise` pure-noise columns. Labels
/// alternate 0, 1.
inline features::FeatureMatrix planted_matrix(std::size_t n, std::size_t signal, std::size_t noise, double effect,
                                              std::uint64_t seed) {
  Rng rng(seed);
  features::FeatureMatrix m;
  for (std::size_t j = 0; j < signal + noise; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", j < signal ? "signal" : "noise", j);
    m.names.emplace_back(buf);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    m.labels.push_back(label);
    m.patient_ids.push_back("p" + std::to_string(i));
    std::vector<double> row;
    for (std::size_t j = 0; j < signal + noise; ++j) row.push_back(rng.normal() + (j < signal ? effect * label : 0.0));
    m.rows.push_back(std::move(row));
  }
  return m;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

#ifdef VOCALHF_CLI_PATH
/// Runs the command-line tool with `args` (already shell-quoted).
inline CliResult run_cli(const std::string& args, const fs::path& scratch) {
  const auto out = scratch / "cli_stdout.txt";
  const auto err = scratch / "cli_stderr.txt";
  const std::string cmd =
      std::string("\"") + VOCALHF_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}
#endif

}  // namespace vocalhf::testing

// Copyright 2026 The dubalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dubalign/config.hpp"
#include "dubalign/core.hpp"

namespace dubalign {

// Stage order of a full run.
enum class Stage { kFrames, kVad, kTranscribe, kTranslate, kSimilarity, kMatch, kExport, kStats };
inline constexpr Stage kAllStages[] = {Stage::kFrames,     Stage::kVad,   Stage::kTranscribe,
                                       Stage::kTranslate,  Stage::kSimilarity, Stage::kMatch,
                                       Stage::kExport,     Stage::kStats};
std::string_view StageName(Stage s);
std::optional<Stage> ParseStage(std::string_view name);

struct TrackInput {
  TrackId track;
  std::filesystem::path frames;  // frame manifest
  std::filesystem::path audio;
  std::optional<std::filesystem::path> vad;  // labeled table; energy VAD otherwise
  std::string language;
  std::optional<std::filesystem::path> asr_table;
  std::optional<std::string> asr_url;
};

// `input.*` and `text.*` keys of the config file. Relative paths resolve
// against the config file's directory.
struct PipelineInputs {
  TrackInput d1;
  TrackInput d2;
  std::optional<std::filesystem::path> mt_table;
  std::optional<std::string> mt_url;
  bool mt_echo = false;
  std::filesystem::path embeddings;
  std::string translate_track;  // track whose transcripts get translated
};

PipelineInputs ResolveInputs(const ConfigFile& file, const std::filesystem::path& base_dir);

struct PipelineOptions {
  std::filesystem::path out_dir;
  ConfigFile file;
  std::filesystem::path config_dir;
  PipelineConfig cfg;
  int jobs = 1;
  bool force = false;
};

struct StageReport {
  Stage stage;
  bool skipped = false;
  double seconds = 0.0;
  std::vector<std::filesystem::path> outputs;
};

// Runs stages against `out_dir`, recording each in `ledger.json`. A stage is
// skipped when its input fingerprint and recorded outputs are unchanged.
class Pipeline {
 public:
  Pipeline(PipelineOptions opts, std::ostream& log);

  StageReport RunStage(Stage stage);
  std::vector<StageReport> RunAll();

  const PipelineConfig& config() const { return opts_.cfg; }
  std::filesystem::path Artifact(const std::string& relative) const { return opts_.out_dir / relative; }

 private:
  const PipelineInputs& Inputs();
  // Inputs read by a stage, paired with the stage that produces them (empty
  // for external inputs).
  std::vector<std::pair<std::filesystem::path, std::string>> StageInputs(Stage stage);
  std::vector<std::filesystem::path> Execute(Stage stage);
  std::string Fingerprint(Stage stage);
  void LoadLedger();
  void SaveLedger();

  PipelineOptions opts_;
  std::ostream& log_;
  std::optional<PipelineInputs> inputs_;
  nlohmann::json ledger_;
};

}  // namespace dubalign

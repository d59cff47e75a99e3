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
#include <map>
#include <string>

#include "dubalign/core.hpp"

namespace dubalign {

// Thresholds and knobs shared by every pipeline stage.
struct PipelineConfig {
  int fps = 30;
  double ssim_threshold = 0.75;
  int search_window_frames = 500;
  bool drift_compensation = true;
  int frame_stride = 1;  // compare every k-th frame, propagate verdicts to the rest
  double energy_threshold_db = -40.0;
  double max_start_diff_s = 9.0;
  double max_dur_diff_s = 8.0;
  double min_similarity = 0.5;
  int max_window_segments = 4;

  Millis max_start_diff_ms() const { return SecondsToMillis(max_start_diff_s); }
  Millis max_dur_diff_ms() const { return SecondsToMillis(max_dur_diff_s); }

  bool operator==(const PipelineConfig&) const = default;
};

// Flat `key = value` file. Keys may carry a dotted section prefix.
// `#` starts a comment; blank lines are ignored.
class ConfigFile {
 public:
  static ConfigFile Parse(const std::string& text, const std::string& origin = "<config>");
  static ConfigFile Load(const std::filesystem::path& path);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::string* Find(const std::string& key) const;
  void Set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_;
};

// Applies recognized `frames.*`, `vad.*` and `match.*` keys (or their bare
// field names) over `base` and validates ranges. Keys in other sections are
// left for their consumers.
PipelineConfig ApplyConfig(const ConfigFile& file, PipelineConfig base = {});
PipelineConfig LoadConfig(const std::filesystem::path& path);

// Throws kValidation naming the offending key.
void ValidateConfig(const PipelineConfig& cfg);

std::string SerializeConfig(const PipelineConfig& cfg);
std::string ConfigHash(const PipelineConfig& cfg);

// Formats a double with the shortest representation that round-trips.
std::string FormatDouble(double v);

}  // namespace dubalign

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
#include <optional>
#include <string>
#include <vector>

#include "dubalign/audio.hpp"
#include "dubalign/config.hpp"
#include "dubalign/core.hpp"
#include "dubalign/matcher.hpp"

namespace dubalign {

struct PairSide {
  TrackId track;
  std::string language;
  SegmentLabel label = SegmentLabel::kMale;
  std::vector<std::string> ids;
  std::vector<TimeSpan> spans;
  std::vector<std::optional<std::string>> transcripts;
  std::vector<std::optional<std::string>> translations;
  std::string audio;  // relative to the manifest directory
  Millis duration_ms = 0;
  bool operator==(const PairSide&) const = default;
};

struct PairManifestEntry {
  std::string pair_id;
  PairKind kind = PairKind::kOneToOne;
  double score = 0.0;
  PairSide left;
  PairSide right;
  bool operator==(const PairManifestEntry&) const = default;
};

// Builds the manifest rows without touching the filesystem.
std::vector<PairManifestEntry> ManifestEntries(const MatchOutcome& outcome,
                                               const std::vector<SpeechSegment>& left,
                                               const std::vector<SpeechSegment>& right);

// Writes `<out_dir>/manifest.jsonl` and one WAV per pair side under
// `<out_dir>/audio/`. Multi-segment sides are concatenated in track order.
std::filesystem::path ExportPairs(const MatchOutcome& outcome,
                                  const std::vector<SpeechSegment>& left,
                                  const std::vector<SpeechSegment>& right,
                                  const AudioTrack& left_audio, const AudioTrack& right_audio,
                                  const std::filesystem::path& out_dir, int jobs = 1);

std::vector<PairManifestEntry> LoadManifest(const std::filesystem::path& path);

struct TrackInventory {
  TrackId track;
  std::string language;
  double input_duration_s = 0.0;
  std::size_t input_segments = 0;
};

struct CorpusStats {
  std::vector<TrackInventory> inputs;  // first entry is the reference track
  std::vector<std::size_t> output_segments;
  double output_duration_s = 0.0;
  double avg_similarity = 0.0;
  double percent_yield = 0.0;
  double max_start_diff_s = 0.0;
  double max_dur_diff_s = 0.0;
};

double PercentYield(double output_duration_s, double input_duration_s);
// Percent with one decimal, and the integer the published tables print.
double RoundPercent(double percent);
int TruncatedPercent(double percent);

// A pair contributes the mean of its two sides' durations.
CorpusStats ComputeStats(const MatchOutcome& outcome, const std::vector<SpeechSegment>& left,
                         const std::vector<SpeechSegment>& right,
                         const std::vector<TrackInventory>& inputs, const PipelineConfig& cfg);

// "17.6 hrs", "11 mins", "42 secs".
std::string FormatDuration(double seconds);

std::vector<std::string> StatsHeader();
std::vector<std::string> StatsRow(const CorpusStats& s);
// Space-aligned text table with a footer note on the output duration.
std::string StatsTable(const std::vector<CorpusStats>& rows);
std::string StatsTsv(const std::vector<CorpusStats>& rows);

}  // namespace dubalign

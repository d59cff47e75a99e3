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

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dubalign/audio.hpp"
#include "dubalign/core.hpp"

namespace dubalign {

struct VadSegment {
  SegmentLabel label;
  TimeSpan span;
  bool operator==(const VadSegment&) const = default;
};

struct VadReport {
  TrackId track;
  std::vector<VadSegment> segments;
  // Set by the energy fallback: speech and music are not told apart, every
  // active span carries the `male` placeholder label.
  bool degraded_labels = false;
  bool operator==(const VadReport&) const = default;
};

// Reads `label\tstart\tstop` rows (seconds). An optional header row whose
// first field is `label` or `labels` is skipped. Rows must be chronological
// and non-overlapping; when `track_duration_ms` is given they must also end
// within the track.
VadReport IngestVad(const std::filesystem::path& path, TrackId track,
                    std::optional<Millis> track_duration_ms = std::nullopt);
VadReport ParseVad(const std::string& text, TrackId track, const std::string& origin,
                   std::optional<Millis> track_duration_ms = std::nullopt);
std::string SerializeVad(const VadReport& report);
void WriteVad(const std::filesystem::path& path, const VadReport& report);

struct EnergyVadOptions {
  int frame_ms = 25;
  int hop_ms = 10;
  double threshold_db = -40.0;  // relative to the loudest frame
  double floor_dbfs = -70.0;    // frames below this are silent regardless
  int min_segment_ms = 200;
  int merge_gap_ms = 100;
};

// Offline fallback segmenter. Emits active spans labeled `male` and fills the
// rest of the track with `noEnergy`, so the output tiles the whole track.
VadReport EnergyVad(const AudioTrack& audio, const EnergyVadOptions& options = {});

using LabelCounts = std::array<std::size_t, std::size(kAllLabels)>;

// Number of segments per label, keyed by track id.
std::map<std::string, LabelCounts> LabelHistogram(const std::vector<VadReport>& reports);
std::string FormatHistogram(const std::map<std::string, LabelCounts>& histogram);

std::string SegmentIdFor(const TrackId& track, std::size_t ordinal);

// Keeps female/male/music spans as segments awaiting transcription. Ids are
// `<track>-<ordinal>` with a 1-based, zero-padded ordinal.
std::vector<SpeechSegment> SliceSpeechSegments(const VadReport& report,
                                               const std::string& language);

}  // namespace dubalign

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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dubalign/core.hpp"
#include "dubalign/image.hpp"

namespace dubalign {

// A commercial inserted into one track at a content-timeline position.
struct SynthBlock {
  std::string track;  // "D1" or "D2"
  double insert_at_s = 0.0;
  double length_s = 0.0;
};

// Parses `<track>@<insert_s>:<length_s>`, e.g. `D2@30:10`.
SynthBlock ParseSynthBlock(const std::string& text);

struct SynthSpec {
  std::uint64_t seed = 1;
  int fps = 30;
  int width = 32;
  int height = 24;
  std::size_t one_to_one = 52;
  std::size_t one_to_many = 4;
  std::size_t many_to_one = 4;
  std::size_t decoys = 12;
  std::size_t unrecognized = 4;
  std::vector<SynthBlock> blocks;
  std::size_t min_content_frames = 0;  // pads the content with silent video
  int pixel_noise = 2;                 // per-pixel noise is a sum of 4 draws in [-n, n]
  std::string d1_language = "tr";
  std::string d2_language = "ar";
};

// Throws kValidation for blocks outside the content, overlapping blocks, or
// block lengths whose audio would not fall on whole samples.
void ValidateSynthSpec(const SynthSpec& spec);

struct ExpectedPair {
  std::string kind;
  std::vector<std::string> left;
  std::vector<std::string> right;
};

struct SynthTrackTruth {
  std::string track;
  std::size_t raw_frames = 0;
  // Raw frame index ranges [begin, end) holding commercial frames.
  std::vector<std::pair<std::size_t, std::size_t>> removed;
};

struct SynthTruth {
  std::uint64_t seed = 0;
  int fps = 30;
  std::size_t content_frames = 0;
  std::vector<SynthTrackTruth> tracks;
  std::vector<ExpectedPair> pairs;
  std::vector<std::string> decoy_left;
  std::vector<std::string> decoy_right;
  std::vector<std::string> unrecognized;
};

nlohmann::json TruthToJson(const SynthTruth& t);
SynthTruth TruthFromJson(const nlohmann::json& j);
SynthTruth ReadTruth(const std::filesystem::path& path);

// Frame layout of one track: for each raw frame, the content frame it shows
// or -1 - k for the k-th commercial frame.
std::vector<std::int64_t> SynthFrameLayout(const SynthSpec& spec, const std::string& track,
                                           std::size_t content_frames);
FrameImage SynthContentFrame(const SynthSpec& spec, std::size_t content_index);
FrameImage SynthCommercialFrame(const SynthSpec& spec, std::size_t commercial_index);
// The frame a track shows at a raw index, including its per-track noise.
FrameImage SynthTrackFrame(const SynthSpec& spec, const std::string& track,
                           const std::vector<std::int64_t>& layout, std::size_t raw_index);

// Writes both tracks (frames, audio, VAD table, ASR table), the MT table,
// the embeddings, `truth.json` and a `pipeline.conf` wired to all of them.
SynthTruth GenerateSynth(const SynthSpec& spec, const std::filesystem::path& out_dir, int jobs = 1);

}  // namespace dubalign

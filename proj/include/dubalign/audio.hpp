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
#include <span>
#include <vector>

#include "dubalign/core.hpp"

namespace dubalign {

inline constexpr int kSampleRate = 16000;
inline constexpr int kSamplesPerMs = kSampleRate / 1000;

// Mono 16-bit PCM at 16 kHz. Other rates are rejected rather than resampled.
struct AudioTrack {
  TrackId track;
  int sample_rate = kSampleRate;
  std::vector<std::int16_t> samples;

  Millis duration_ms() const { return static_cast<Millis>(samples.size()) / kSamplesPerMs; }

  // Samples covering `span`; throws kValidation if the span leaves the track.
  std::span<const std::int16_t> Slice(const TimeSpan& span) const;
};

AudioTrack ReadWav(const std::filesystem::path& path, TrackId track);
void WriteWav(const std::filesystem::path& path, std::span<const std::int16_t> samples);
std::vector<std::uint8_t> EncodeWav(std::span<const std::int16_t> samples);

}  // namespace dubalign

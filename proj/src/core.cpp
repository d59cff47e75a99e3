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

#include "dubalign/core.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dubalign/hash.hpp"

namespace dubalign {

Millis SecondsToMillis(double seconds) {
  if (!std::isfinite(seconds)) Fail(ErrorKind::kValidation, "non-finite time value");
  return static_cast<Millis>(std::llround(seconds * 1000.0));
}

TimeSpan::TimeSpan(Millis start_ms, Millis end_ms) : start_ms_(start_ms), end_ms_(end_ms) {
  if (start_ms < 0) {
    Fail(ErrorKind::kValidation, "time span starts before zero: " + std::to_string(start_ms) + " ms");
  }
  if (end_ms <= start_ms) {
    Fail(ErrorKind::kValidation, "inverted or empty time span [" + std::to_string(start_ms) +
                                     ", " + std::to_string(end_ms) + ") ms");
  }
}

TimeSpan TimeSpan::FromSeconds(double start_s, double end_s) {
  return TimeSpan(SecondsToMillis(start_s), SecondsToMillis(end_s));
}

std::string_view LabelName(SegmentLabel label) {
  switch (label) {
    case SegmentLabel::kFemale: return "female";
    case SegmentLabel::kMale: return "male";
    case SegmentLabel::kMusic: return "music";
    case SegmentLabel::kNoise: return "noise";
    case SegmentLabel::kNoEnergy: return "noEnergy";
  }
  return "?";
}

std::optional<SegmentLabel> ParseLabel(std::string_view name) {
  for (SegmentLabel l : kAllLabels) {
    if (LabelName(l) == name) return l;
  }
  return std::nullopt;
}

void CheckChronological(const std::vector<SpeechSegment>& segments) {
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const auto& prev = segments[i - 1].span;
    const auto& cur = segments[i].span;
    if (cur.start_ms() < prev.end_ms()) {
      Fail(ErrorKind::kValidation, "segments " + segments[i - 1].id + " and " + segments[i].id +
                                       " overlap or are out of order");
    }
  }
}

std::string Fnv1a::hex() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << state_;
  return os.str();
}

std::string HashHex(std::string_view bytes) {
  Fnv1a h;
  h.Update(bytes);
  return h.hex();
}

std::string HashFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kMissingArtifact, "cannot open " + path.string());
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.Update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

}  // namespace dubalign

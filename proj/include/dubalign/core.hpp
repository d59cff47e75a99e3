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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dubalign {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kUsage,            // exit 2
  kMissingArtifact,  // exit 3
  kValidation,       // exit 4
  kIo,
  kTransport,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Identifier of one dubbed variant ("D1", "D2").
class TrackId {
 public:
  TrackId() = default;
  explicit TrackId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) Fail(ErrorKind::kValidation, "track id must be non-empty");
  }
  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }
  auto operator<=>(const TrackId&) const = default;

 private:
  std::string value_;
};

using Millis = std::int64_t;

Millis SecondsToMillis(double seconds);
inline double MillisToSeconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

// Half-open interval [start, end) stored at 1 ms resolution.
class TimeSpan {
 public:
  TimeSpan() = default;
  TimeSpan(Millis start_ms, Millis end_ms);
  static TimeSpan FromSeconds(double start_s, double end_s);

  Millis start_ms() const noexcept { return start_ms_; }
  Millis end_ms() const noexcept { return end_ms_; }
  Millis duration_ms() const noexcept { return end_ms_ - start_ms_; }
  double start_s() const noexcept { return MillisToSeconds(start_ms_); }
  double end_s() const noexcept { return MillisToSeconds(end_ms_); }
  double duration_s() const noexcept { return MillisToSeconds(duration_ms()); }

  bool Overlaps(const TimeSpan& o) const noexcept {
    return start_ms_ < o.end_ms_ && o.start_ms_ < end_ms_;
  }
  auto operator<=>(const TimeSpan&) const = default;

 private:
  Millis start_ms_ = 0;
  Millis end_ms_ = 1;
};

enum class SegmentLabel { kFemale, kMale, kMusic, kNoise, kNoEnergy };

inline constexpr SegmentLabel kAllLabels[] = {SegmentLabel::kFemale, SegmentLabel::kMale,
                                              SegmentLabel::kMusic, SegmentLabel::kNoise,
                                              SegmentLabel::kNoEnergy};

std::string_view LabelName(SegmentLabel label);
std::optional<SegmentLabel> ParseLabel(std::string_view name);

// Labels that carry speech worth matching: female, male and music.
inline bool IsMatchable(SegmentLabel l) {
  return l == SegmentLabel::kFemale || l == SegmentLabel::kMale || l == SegmentLabel::kMusic;
}

struct SpeechSegment {
  std::string id;
  TrackId track;
  TimeSpan span;
  SegmentLabel label = SegmentLabel::kMale;
  // nullopt marks a segment the recognizer could not transcribe.
  std::optional<std::string> transcript;
  std::optional<std::string> translation;
  std::string language;

  bool recognized() const noexcept { return transcript.has_value(); }
  bool operator==(const SpeechSegment&) const = default;
};

// Throws unless segments are sorted by start and pairwise disjoint.
void CheckChronological(const std::vector<SpeechSegment>& segments);

}  // namespace dubalign

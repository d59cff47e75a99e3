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

#include <doctest.h>

#include <cmath>

#include "dubalign/audio.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/segmenter.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::TempDir;

namespace {

ErrorKind KindOf(const std::string& text, std::optional<Millis> duration = std::nullopt) {
  try {
    ParseVad(text, TrackId("D1"), "vad", duration);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

AudioTrack ToneTrack(const std::vector<std::pair<Millis, Millis>>& loud, Millis total_ms) {
  AudioTrack a;
  a.track = TrackId("D1");
  a.samples.assign(static_cast<std::size_t>(total_ms * kSamplesPerMs), 0);
  for (auto [b, e] : loud) {
    for (Millis s = b * kSamplesPerMs; s < e * kSamplesPerMs; ++s) {
      a.samples[static_cast<std::size_t>(s)] = static_cast<std::int16_t>(8000 * std::sin(0.2 * static_cast<double>(s)));
    }
  }
  return a;
}

}  // namespace

TEST_SUITE("segmenter") {

TEST_CASE("vad tables parse with an optional header") {
  const auto r = ParseVad("labels\tstart\tstop\nmale\t0.0\t1.5\nnoEnergy\t1.5\t2\nfemale\t2.25\t4.0\n",
                          TrackId("D1"), "vad");
  REQUIRE(r.segments.size() == 3);
  CHECK(r.segments[0].label == SegmentLabel::kMale);
  CHECK(r.segments[0].span == TimeSpan(0, 1500));
  CHECK(r.segments[2].span == TimeSpan(2250, 4000));
  CHECK_FALSE(r.degraded_labels);
  CHECK(ParseVad(SerializeVad(r), TrackId("D1"), "again") == r);
}

TEST_CASE("vad tables reject bad rows") {
  CHECK(KindOf("male\t1.0\n") == ErrorKind::kValidation);
  CHECK(KindOf("speech\t0\t1\n") == ErrorKind::kValidation);
  CHECK(KindOf("male\t2\t1\n") == ErrorKind::kValidation);
  CHECK(KindOf("male\t0\t2\nmale\t1\t3\n") == ErrorKind::kValidation);
  CHECK(KindOf("male\tx\t3\n") == ErrorKind::kValidation);
  CHECK(KindOf("male\t0\t3\n", 2000) == ErrorKind::kValidation);
  CHECK(KindOf("male\t0\t2\n", 2000) == ErrorKind::kIo);  // no error
  try {
    IngestVad("/nonexistent/vad.tsv", TrackId("D1"));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
}

TEST_CASE("slicing keeps speech and music with ordinal ids") {
  const auto r = ParseVad("music\t0\t1\nnoise\t1\t2\nmale\t2\t3\nnoEnergy\t3\t4\nfemale\t4\t5\n",
                          TrackId("D2"), "vad");
  const auto segs = SliceSpeechSegments(r, "ar");
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].id == "D2-0001");
  CHECK(segs[1].id == "D2-0002");
  CHECK(segs[1].label == SegmentLabel::kMale);
  CHECK(segs[2].span == TimeSpan(4000, 5000));
  CHECK(segs[2].language == "ar");
  CHECK_FALSE(segs[0].recognized());
  CHECK(SegmentIdFor(TrackId("D1"), 12345) == "D1-12345");
}

TEST_CASE("label histogram counts per track") {
  const auto a = ParseVad("male\t0\t1\nmale\t1\t2\nmusic\t2\t3\n", TrackId("D1"), "a");
  const auto b = ParseVad("female\t0\t1\n", TrackId("D2"), "b");
  const auto h = LabelHistogram({a, b});
  CHECK(h.at("D1")[1] == 2);
  CHECK(h.at("D1")[2] == 1);
  CHECK(h.at("D2")[0] == 1);
  const auto text = FormatHistogram(h);
  CHECK(text.find("D1") != std::string::npos);
  CHECK(text.find("noEnergy") != std::string::npos);
}

TEST_CASE("energy vad finds tones and tiles the track") {
  const auto audio = ToneTrack({{500, 1500}, {2500, 4000}}, 5000);
  const auto r = EnergyVad(audio);
  CHECK(r.degraded_labels);
  std::vector<TimeSpan> active;
  Millis cursor = 0;
  for (const auto& s : r.segments) {
    CHECK(s.span.start_ms() == cursor);
    cursor = s.span.end_ms();
    if (s.label == SegmentLabel::kMale) active.push_back(s.span);
  }
  CHECK(cursor == 5000);
  REQUIRE(active.size() == 2);
  CHECK(std::llabs(active[0].start_ms() - 500) <= 30);
  CHECK(std::llabs(active[0].end_ms() - 1500) <= 30);
  CHECK(std::llabs(active[1].start_ms() - 2500) <= 30);
  CHECK(std::llabs(active[1].end_ms() - 4000) <= 30);
}

TEST_CASE("energy vad drops blips and bridges short gaps") {
  const auto audio = ToneTrack({{500, 600}, {1000, 2000}, {2050, 3000}}, 4000);
  const auto r = EnergyVad(audio);
  std::vector<TimeSpan> active;
  for (const auto& s : r.segments) {
    if (s.label == SegmentLabel::kMale) active.push_back(s.span);
  }
  REQUIRE(active.size() == 1);
  CHECK(std::llabs(active[0].start_ms() - 1000) <= 30);
  CHECK(std::llabs(active[0].end_ms() - 3000) <= 30);
}

TEST_CASE("silent audio yields no speech") {
  const auto r = EnergyVad(ToneTrack({}, 2000));
  for (const auto& s : r.segments) CHECK(s.label == SegmentLabel::kNoEnergy);
}

TEST_CASE("vad files round-trip through disk") {
  TempDir dir("vad");
  const auto r = ParseVad("male\t0\t1.5\nfemale\t2\t3\n", TrackId("D1"), "v");
  WriteFileAtomic(dir / "v.tsv", SerializeVad(r));
  CHECK(IngestVad(dir / "v.tsv", TrackId("D1"), 3000) == r);
}

}  // TEST_SUITE

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

#include "dubalign/audio.hpp"
#include "dubalign/corpus.hpp"
#include "dubalign/segment_io.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::MakeSegment;
using dubalign::testing::TempDir;

namespace {

struct Fixture {
  std::vector<SpeechSegment> left, right;
  MatchOutcome outcome;
  AudioTrack left_audio, right_audio;

  Fixture() {
    left = {MakeSegment("D1-0001", "D1", 0, 2000, SegmentLabel::kMale, "a"),
            MakeSegment("D1-0002", "D1", 3000, 5000, SegmentLabel::kFemale, "b"),
            MakeSegment("D1-0003", "D1", 5500, 6500, SegmentLabel::kFemale, "c")};
    right = {MakeSegment("D2-0001", "D2", 100, 2300, SegmentLabel::kMale, "a"),
             MakeSegment("D2-0002", "D2", 3200, 6000, SegmentLabel::kFemale, "bc"),
             MakeSegment("D2-0003", "D2", 8000, 9000, SegmentLabel::kMale, "z")};
    outcome.pairs = {{{"D1-0001"}, {"D2-0001"}, 0.9, PairKind::kOneToOne, {true, true, true, true}},
                     {{"D1-0002", "D1-0003"}, {"D2-0002"}, 0.7, PairKind::kManyToOne, {true, true, true, true}}};
    outcome.unmatched_right = {"D2-0003"};
    left_audio.track = TrackId("D1");
    right_audio.track = TrackId("D2");
    for (int i = 0; i < 10 * kSampleRate; ++i) {
      left_audio.samples.push_back(static_cast<std::int16_t>(i / kSamplesPerMs));
      right_audio.samples.push_back(static_cast<std::int16_t>(-(i / kSamplesPerMs)));
    }
  }
};

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("published yield arithmetic") {
  const double hour = 3600.0;
  const double p1 = PercentYield(17.6 * hour, 36 * hour);
  CHECK(RoundPercent(p1) == doctest::Approx(48.9));
  CHECK(TruncatedPercent(p1) == 48);
  const double p2 = PercentYield(14.3 * hour, 36 * hour);
  CHECK(RoundPercent(p2) == doctest::Approx(39.7));
  CHECK(TruncatedPercent(p2) == 39);
  CHECK(TruncatedPercent(PercentYield(18 * hour, 36 * hour)) == 50);
  CHECK_THROWS_AS(PercentYield(1.0, 0.0), Error);
}

TEST_CASE("durations format like the published tables") {
  CHECK(FormatDuration(36 * 3600.0) == "36 hrs");
  CHECK(FormatDuration(17.6 * 3600.0) == "17.6 hrs");
  CHECK(FormatDuration(660.0) == "11 mins");
  CHECK(FormatDuration(42.4) == "42 secs");
}

TEST_CASE("stats take the mean of both sides per pair") {
  Fixture f;
  const std::vector<TrackInventory> inv = {{TrackId("D1"), "tr", 36 * 3600.0, 28800},
                                           {TrackId("D2"), "ar", 35 * 3600.0, 27678}};
  const auto s = ComputeStats(f.outcome, f.left, f.right, inv, PipelineConfig{});
  // Pair 1: (2.0 + 2.2) / 2; pair 2: (3.0 + 2.8) / 2.
  CHECK(s.output_duration_s == doctest::Approx(2.1 + 2.9));
  CHECK(s.output_segments == std::vector<std::size_t>{3, 2});
  CHECK(s.avg_similarity == doctest::Approx(0.8));
  const auto row = StatsRow(s);
  REQUIRE(row.size() == StatsHeader().size());
  CHECK(row[0] == "TR-AR");
  CHECK(row[1] == "36 hrs");
  CHECK(row[2] == "28800;27678");
  CHECK(row[3] == "<=9");
  CHECK(row[4] == "<=8");
  CHECK(row[5] == "3;2");
  CHECK(row[6] == "5 secs");
  CHECK(row[7] == "0.80");
  CHECK(row[8] == "0.0 (0)");
  const auto table = StatsTable({s});
  CHECK(table.find("Avg Similarity") != std::string::npos);
  CHECK(table.find("TR-AR") != std::string::npos);
  CHECK(StatsTsv({s}).find("TR-AR\t36 hrs\t") != std::string::npos);
  CHECK_THROWS_AS(StatsTable({}), Error);
}

TEST_CASE("export writes one wav per side and a manifest") {
  TempDir dir("export");
  Fixture f;
  const auto manifest = ExportPairs(f.outcome, f.left, f.right, f.left_audio, f.right_audio, dir / "corpus", 4);
  const auto entries = LoadManifest(manifest);
  CHECK(entries == ManifestEntries(f.outcome, f.left, f.right));
  REQUIRE(entries.size() == 2);
  CHECK(entries[1].pair_id == "P00002");
  CHECK(entries[1].kind == PairKind::kManyToOne);
  CHECK(entries[1].left.duration_ms == 3000);
  CHECK(entries[1].left.label == SegmentLabel::kFemale);
  CHECK(entries[1].right.transcripts.front() == "bc");

  const auto wav = ReadWav(dir / "corpus" / entries[1].left.audio, TrackId("D1"));
  REQUIRE(wav.samples.size() == 3000 * kSamplesPerMs);
  // Members are concatenated: 3000..4999 ms, then 5500..6499 ms.
  CHECK(wav.samples.front() == 3000);
  CHECK(wav.samples[2000 * kSamplesPerMs] == 5500);
  CHECK(wav.samples.back() == 6499);
  const auto right = ReadWav(dir / "corpus" / entries[0].right.audio, TrackId("D2"));
  CHECK(right.samples.size() == 2200 * kSamplesPerMs);

  // A rerun replaces stale audio.
  WriteFileAtomic(dir / "corpus/audio/stale.wav", "x");
  ExportPairs(f.outcome, f.left, f.right, f.left_audio, f.right_audio, dir / "corpus", 1);
  CHECK_FALSE(std::filesystem::exists(dir / "corpus/audio/stale.wav"));
}

TEST_CASE("export output is independent of the worker count") {
  TempDir a("exa"), b("exb");
  Fixture f;
  ExportPairs(f.outcome, f.left, f.right, f.left_audio, f.right_audio, a.path(), 1);
  ExportPairs(f.outcome, f.left, f.right, f.left_audio, f.right_audio, b.path(), 8);
  for (const auto* rel : {"manifest.jsonl", "audio/P00001_left.wav", "audio/P00002_right.wav"}) {
    CHECK(ReadFile(a / rel) == ReadFile(b / rel));
  }
}

TEST_CASE("missing manifest is a missing artifact") {
  try {
    LoadManifest("/nonexistent/manifest.jsonl");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
}

}  // TEST_SUITE

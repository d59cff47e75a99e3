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

#include <algorithm>
#include <set>

#include "dubalign/segment_io.hpp"
#include "dubalign/synth.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::TempDir;

namespace {

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

SynthSpec Small(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.fps = 10;
  s.one_to_one = 5;
  s.one_to_many = 1;
  s.many_to_one = 1;
  s.decoys = 2;
  s.unrecognized = 1;
  return s;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("block syntax") {
  const auto b = ParseSynthBlock("D2@30:10");
  CHECK(b.track == "D2");
  CHECK(b.insert_at_s == 30.0);
  CHECK(b.length_s == 10.0);
  CHECK(ParseSynthBlock("D1@0.5:1.5").length_s == 1.5);
  for (const char* bad : {"D2", "D2@30", "@3:4", "D2@x:1", "D2@1:y"}) {
    CAPTURE(bad);
    CHECK(KindOf([&] { ParseSynthBlock(bad); }) == ErrorKind::kUsage);
  }
}

TEST_CASE("spec validation") {
  auto with = [](auto edit) {
    SynthSpec s;
    edit(s);
    return KindOf([&] { ValidateSynthSpec(s); });
  };
  CHECK_NOTHROW(ValidateSynthSpec(SynthSpec{}));
  CHECK(with([](SynthSpec& s) { s.fps = 0; }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.width = 4; }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.pixel_noise = -1; }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.d2_language.clear(); }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.blocks = {{"D3", 1, 1}}; }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.blocks = {{"D2", -1, 1}}; }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.blocks = {{"D2", 1, 0}}; }) == ErrorKind::kValidation);
  // One frame at 30 fps is 533.33 samples.
  CHECK(with([](SynthSpec& s) { s.blocks = {{"D2", 1, 1.0 / 30}}; }) == ErrorKind::kValidation);
  CHECK(with([](SynthSpec& s) { s.blocks = {{"D2", 1, 1}, {"D2", 1, 2}}; }) == ErrorKind::kValidation);
  CHECK_NOTHROW(ValidateSynthSpec([] {
    SynthSpec s;
    s.blocks = {{"D2", 1, 0.1}, {"D1", 4, 2}};
    return s;
  }()));
}

TEST_CASE("frame layout splices commercials at their positions") {
  SynthSpec s;
  s.fps = 10;
  s.blocks = {{"D2", 2.0, 0.5}};
  const auto d1 = SynthFrameLayout(s, "D1", 50);
  const auto d2 = SynthFrameLayout(s, "D2", 50);
  REQUIRE(d1.size() == 50);
  REQUIRE(d2.size() == 55);
  CHECK(d2[19] == 19);
  CHECK(d2[20] == -1);
  CHECK(d2[24] == -5);
  CHECK(d2[25] == 20);
  CHECK(d2.back() == 49);
  s.blocks = {{"D2", 9.0, 0.5}};
  CHECK_THROWS_AS(SynthFrameLayout(s, "D2", 50), Error);
  // Commercial frames differ from every content frame they replace.
  CHECK_FALSE(std::ranges::equal(SynthContentFrame(s, 0).pixels(), SynthCommercialFrame(s, 0).pixels()));
}

TEST_CASE("truth round-trips through JSON") {
  SynthTruth t;
  t.seed = 9;
  t.fps = 10;
  t.content_frames = 120;
  t.tracks = {{"D1", 120, {}}, {"D2", 150, {{40, 70}}}};
  t.pairs = {{"one-to-one", {"D1-0001"}, {"D2-0001"}}, {"many-to-one", {"D1-0002", "D1-0003"}, {"D2-0002"}}};
  t.decoy_left = {"D1-0004"};
  t.decoy_right = {"D2-0003"};
  t.unrecognized = {"D1-0005"};
  const auto back = TruthFromJson(TruthToJson(t));
  CHECK(TruthToJson(back) == TruthToJson(t));
  CHECK(back.tracks[1].removed == t.tracks[1].removed);
  CHECK(KindOf([] { TruthFromJson(nlohmann::json{{"seed", "x"}}); }) == ErrorKind::kValidation);
}

TEST_CASE("generation is deterministic and independent of the worker count") {
  TempDir a("syn"), b("syn"), c("syn");
  auto spec = Small(5);
  spec.blocks = {{"D2", 20, 3}};
  const auto ta = GenerateSynth(spec, a.path(), 1);
  GenerateSynth(spec, b.path(), 4);
  for (const auto* rel : {"truth.json", "pipeline.conf", "mt.jsonl", "embeddings.txt", "D1/audio.wav",
                          "D2/audio.wav", "D1/vad.tsv", "D2/asr.jsonl", "D2/frames.txt"}) {
    CAPTURE(rel);
    CHECK(ReadFile(a / rel) == ReadFile(b / rel));
  }
  spec.seed = 6;
  GenerateSynth(spec, c.path(), 1);
  CHECK(ReadFile(a / "D1/audio.wav") != ReadFile(c / "D1/audio.wav"));

  CHECK(ta.pairs.size() == 7);
  CHECK(ta.decoy_left.size() + ta.decoy_right.size() >= 2);
  REQUIRE(ta.tracks.size() == 2);
  CHECK(ta.tracks[0].raw_frames == ta.content_frames);
  CHECK(ta.tracks[1].raw_frames == ta.content_frames + 30);
  REQUIRE(ta.tracks[1].removed.size() == 1);
  CHECK(ta.tracks[1].removed[0] == std::pair<std::size_t, std::size_t>{200, 230});
  CHECK(ReadTruth(a / "truth.json").pairs.size() == ta.pairs.size());
}

TEST_CASE("planted, decoy and unrecognized segments are disjoint") {
  TempDir dir("syn");
  const auto t = GenerateSynth(Small(8), dir.path());
  std::set<std::string> planted;
  std::size_t kinds[3] = {};
  for (const auto& p : t.pairs) {
    for (const auto& id : p.left) CHECK(planted.insert(id).second);
    for (const auto& id : p.right) CHECK(planted.insert(id).second);
    if (p.kind == "one-to-one") ++kinds[0];
    if (p.kind == "one-to-many") {
      ++kinds[1];
      CHECK(p.right.size() >= 2);
    }
    if (p.kind == "many-to-one") {
      ++kinds[2];
      CHECK(p.left.size() >= 2);
    }
  }
  CHECK(kinds[0] == 5);
  CHECK(kinds[1] == 1);
  CHECK(kinds[2] == 1);
  for (const auto* list : {&t.decoy_left, &t.decoy_right, &t.unrecognized}) {
    for (const auto& id : *list) CHECK_FALSE(planted.count(id));
  }
}

}  // TEST_SUITE

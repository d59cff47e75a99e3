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
#include "dubalign/segment_io.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::TempDir;

TEST_SUITE("audio") {

TEST_CASE("wav round-trip") {
  TempDir dir("wav");
  std::vector<std::int16_t> s = {0, 1, -1, 32767, -32768, 1234};
  WriteWav(dir / "a.wav", s);
  const auto t = ReadWav(dir / "a.wav", TrackId("D1"));
  CHECK(t.samples == s);
  CHECK(t.sample_rate == 16000);
  CHECK(EncodeWav(s).size() == 44 + 2 * s.size());
}

TEST_CASE("wav reader rejects other formats") {
  TempDir dir("wav");
  auto bytes = EncodeWav(std::vector<std::int16_t>(10, 0));
  bytes[24] = 0x44;  // sample rate 16000 -> 16068
  WriteFileAtomic(dir / "rate.wav", std::string(bytes.begin(), bytes.end()));
  CHECK_THROWS_AS(ReadWav(dir / "rate.wav", TrackId("D1")), Error);
  WriteFileAtomic(dir / "junk.wav", "RIFF....WAVE");
  CHECK_THROWS_AS(ReadWav(dir / "junk.wav", TrackId("D1")), Error);
  try {
    ReadWav(dir / "none.wav", TrackId("D1"));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
}

TEST_CASE("slices are bounded by the track") {
  AudioTrack a;
  a.track = TrackId("D1");
  a.samples.assign(16000, 7);
  CHECK(a.duration_ms() == 1000);
  CHECK(a.Slice(TimeSpan(250, 500)).size() == 4000);
  CHECK_THROWS_AS(a.Slice(TimeSpan(900, 1001)), Error);
}

}  // TEST_SUITE

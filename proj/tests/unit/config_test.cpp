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

#include <fstream>

#include "dubalign/config.hpp"
#include "test_support.hpp"

using namespace dubalign;

TEST_SUITE("config") {

TEST_CASE("parse handles comments, blanks and sections") {
  const auto f = ConfigFile::Parse("# top\n\nframes.fps = 25  # inline\nmatch.min_similarity=0.6\ninput.d1.track = D1\n");
  REQUIRE(f.Find("frames.fps"));
  CHECK(*f.Find("frames.fps") == "25");
  const auto cfg = ApplyConfig(f);
  CHECK(cfg.fps == 25);
  CHECK(cfg.min_similarity == doctest::Approx(0.6));
  CHECK(cfg.max_start_diff_s == 9.0);
}

TEST_CASE("bare field names are accepted") {
  const auto cfg = ApplyConfig(ConfigFile::Parse("stride = 3\ndrift_compensation = false\n"));
  CHECK(cfg.frame_stride == 3);
  CHECK_FALSE(cfg.drift_compensation);
}

TEST_CASE("bad values name the key") {
  auto kind_of = [](const std::string& text) {
    try {
      ApplyConfig(ConfigFile::Parse(text));
    } catch (const Error& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(ErrorKind::kIo, std::string());
  };
  auto [k1, m1] = kind_of("frames.fps = abc\n");
  CHECK(k1 == ErrorKind::kValidation);
  CHECK(m1.find("frames.fps") != std::string::npos);
  auto [k2, m2] = kind_of("match.min_similarity = 1.5\n");
  CHECK(k2 == ErrorKind::kValidation);
  CHECK(m2.find("match.min_similarity") != std::string::npos);
  auto [k3, m3] = kind_of("frames.bogus = 1\n");
  CHECK(k3 == ErrorKind::kValidation);
  CHECK(m3.find("frames.bogus") != std::string::npos);
  CHECK_THROWS_AS(ConfigFile::Parse("no equals sign\n"), Error);
}

TEST_CASE("missing config file is a missing artifact") {
  try {
    LoadConfig("/nonexistent/dubalign.conf");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
}

TEST_CASE("serialized config parses back to the same value and hash") {
  PipelineConfig cfg;
  cfg.fps = 24;
  cfg.ssim_threshold = 0.8125;
  cfg.min_similarity = 0.3;
  cfg.drift_compensation = false;
  const auto back = ApplyConfig(ConfigFile::Parse(SerializeConfig(cfg)));
  CHECK(back == cfg);
  CHECK(ConfigHash(back) == ConfigHash(cfg));
  PipelineConfig other = cfg;
  other.max_window_segments = 5;
  CHECK(ConfigHash(other) != ConfigHash(cfg));
}

TEST_CASE("format double round-trips") {
  CHECK(FormatDouble(0.1) == "0.1");
  CHECK(std::stod(FormatDouble(1.0 / 3.0)) == 1.0 / 3.0);
}

}  // TEST_SUITE

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
#include <filesystem>

#include "dubalign/image.hpp"
#include "dubalign/ssim.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::NaiveSsim;
using dubalign::testing::Perturb;
using dubalign::testing::RandomImage;
using dubalign::testing::TempDir;

TEST_SUITE("image_ssim") {

TEST_CASE("luma weights") {
  CHECK(Luma(255, 255, 255) == 255);
  CHECK(Luma(0, 0, 0) == 0);
  CHECK(Luma(255, 0, 0) == 76);
  CHECK(Luma(0, 255, 0) == 150);
  CHECK(Luma(0, 0, 255) == 29);
}

TEST_CASE("y8 and png round-trip") {
  TempDir dir("img");
  Rng rng(3);
  const auto img = RandomImage(rng, 13, 9);
  WriteY8(dir / "a.y8", img);
  WritePng(dir / "a.png", img);
  CHECK(ReadFrame(dir / "a.y8") == img);
  CHECK(ReadFrame(dir / "a.png") == img);
  CHECK_THROWS_AS(ReadFrame(dir / "missing.png"), Error);
  CHECK_THROWS_AS(ReadFrame(dir / "a.bmp"), Error);
}

TEST_CASE("ssim of a frame with itself is exactly one") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto img = RandomImage(rng, 20 + i, 16);
    CHECK(Ssim(img, img) == 1.0);
  }
  const FrameImage flat(16, 16, 77);
  CHECK(Ssim(flat, flat) == 1.0);
}

TEST_CASE("ssim matches the naive per-window reference") {
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    const int w = 8 + static_cast<int>(rng.Below(30));
    const int h = 8 + static_cast<int>(rng.Below(30));
    const auto a = RandomImage(rng, w, h);
    const auto b = i % 2 ? RandomImage(rng, w, h) : Perturb(a, rng, 1 + i);
    CHECK(std::abs(Ssim(a, b) - NaiveSsim(a, b)) <= 1e-9);
  }
}

TEST_CASE("ssim is symmetric and bounded") {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const auto a = RandomImage(rng, 24, 24);
    const auto b = Perturb(a, rng, 40);
    const double ab = Ssim(a, b);
    CHECK(ab == Ssim(b, a));
    CHECK(ab <= 1.0);
    CHECK(ab >= -1.0);
  }
}

TEST_CASE("ssim decreases as noise grows") {
  Rng rng(9);
  const auto a = RandomImage(rng, 32, 32);
  double prev = 1.0;
  for (int amount : {4, 16, 64}) {
    Rng noise(1);
    const double s = Ssim(a, Perturb(a, noise, amount));
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("ssim rejects mismatched or tiny frames") {
  CHECK_THROWS_AS(Ssim(FrameImage(10, 10), FrameImage(10, 11)), Error);
  CHECK_THROWS_AS(Ssim(FrameImage(6, 10), FrameImage(6, 10)), Error);
}

}  // TEST_SUITE

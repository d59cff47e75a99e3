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

#include "dubalign/segment_io.hpp"
#include "dubalign/similarity.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::MakeSegment;
using dubalign::testing::RandomMatcherInstance;
using dubalign::testing::TempDir;

namespace {

EmbeddingTable Plane() {
  return ParseEmbeddings("4 2\nx 1 0\ny 0 1\nxy 1 1\nneg -1 0\n", "plane");
}

std::string ErrorText(const std::string& text) {
  try {
    ParseEmbeddings(text, "emb");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("similarity") {

TEST_CASE("embedding files parse and report bad rows") {
  const auto t = ParseEmbeddings("2 3\nbir 1 2 3\niki 4 5 6\n", "emb");
  CHECK(t.size() == 2);
  CHECK(t.dim() == 3);
  REQUIRE(t.Find("iki"));
  CHECK((*t.Find("iki"))[2] == 6.0f);
  CHECK_FALSE(t.Find("uc"));
  CHECK(ErrorText("2 3\nbir 1 2 3\niki 4 5\n").find(":3") != std::string::npos);
  CHECK_FALSE(ErrorText("0 3\n").empty());
  CHECK_FALSE(ErrorText("x y\n").empty());
  CHECK_FALSE(ErrorText("3 2\na 1 1\n").empty());
}

TEST_CASE("duplicate tokens keep the last vector with a warning") {
  const auto t = ParseEmbeddings("2 2\na 1 0\na 0 1\n", "emb");
  CHECK(t.size() == 1);
  CHECK((*t.Find("a"))[1] == 1.0f);
  CHECK(t.warnings().size() == 1);
}

TEST_CASE("tokenizer lowercases letter runs, including non-ASCII") {
  CHECK(Tokenize("Merhaba, DÜNYA!  x2y") == std::vector<std::string>{"merhaba", "dünya", "x", "y"});
  CHECK(Tokenize("مرحبا بالعالم") == std::vector<std::string>{"مرحبا", "بالعالم"});
  CHECK(Tokenize("123 ... ").empty());
}

TEST_CASE("sentence vectors average covered tokens") {
  const auto t = Plane();
  CHECK(SentenceVector("x", t) == std::vector<double>{1, 0});
  CHECK(SentenceVector("x y zzz", t) == std::vector<double>{0.5, 0.5});
  CHECK_FALSE(SentenceVector("zzz qqq", t));
  CHECK_FALSE(SentenceVector("", t));
}

TEST_CASE("cosine values and errors") {
  const std::vector<double> a{1, 0}, b{0, 1}, c{1, 1}, z{0, 0}, d3{1, 0, 0};
  CHECK(Cosine(a, a) == doctest::Approx(1.0));
  CHECK(Cosine(a, b) == 0.0);
  CHECK(Cosine(a, c) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(Cosine(a, z), Error);
  CHECK_THROWS_AS(Cosine(a, d3), Error);
}

TEST_CASE("text similarity clamps negatives and handles missing coverage") {
  const auto t = Plane();
  CHECK(TextSimilarity("x", "neg", t) == 0.0);
  CHECK(TextSimilarity("x", "x", t) == doctest::Approx(1.0));
  CHECK(TextSimilarity("x", "zzz", t) == 0.0);
}

TEST_CASE("identical texts give a unit diagonal") {
  const auto t = Plane();
  std::vector<SpeechSegment> l, r;
  const char* texts[] = {"x", "y", "xy", "x y", "y xy"};
  for (int k = 0; k < 5; ++k) {
    l.push_back(MakeSegment("L" + std::to_string(k), "L", k * 1000, k * 1000 + 500, SegmentLabel::kMale, texts[k]));
    r.push_back(MakeSegment("R" + std::to_string(k), "R", k * 1000, k * 1000 + 500, SegmentLabel::kMale, texts[k]));
  }
  const auto m = BuildMatrix(l, r, t, PipelineConfig{});
  for (std::size_t k = 0; k < 5; ++k) {
    REQUIRE(m.Find(k, k));
    CHECK(m.Find(k, k)->score == doctest::Approx(1.0));
  }
  CHECK(BuildMatrix(l, {}, t, PipelineConfig{}).entries().empty());
}

TEST_CASE("stored entries equal a dense recompute and cover every reachable pair") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto inst = RandomMatcherInstance(seed);
    const auto m = BuildMatrix(inst.left, inst.right, inst.table, inst.cfg);
    const Millis reach = inst.cfg.max_start_diff_ms() + CandidateSlackMs(inst.left, inst.right, inst.cfg);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < inst.left.size(); ++i) {
      for (std::size_t j = 0; j < inst.right.size(); ++j) {
        const Millis d = std::llabs(inst.left[i].span.start_ms() - inst.right[j].span.start_ms());
        const auto e = m.Find(i, j);
        CHECK(e.has_value() == (d <= reach));
        if (!e) continue;
        ++expected;
        const double dense = TextSimilarity(*inst.left[i].translation, *inst.right[j].transcript, inst.table);
        CHECK(e->score == dense);
        CHECK(e->score >= 0.0);
        CHECK(e->score <= 1.0);
      }
    }
    CHECK(m.entries().size() == expected);
  }
}

TEST_CASE("matrix is independent of the worker count") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = RandomMatcherInstance(seed);
    const auto one = BuildMatrix(inst.left, inst.right, inst.table, inst.cfg, 1);
    CHECK(one == BuildMatrix(inst.left, inst.right, inst.table, inst.cfg, 4));
    CHECK(one == BuildMatrix(inst.left, inst.right, inst.table, inst.cfg, 16));
  }
}

TEST_CASE("slack covers the widest window on either side") {
  std::vector<SpeechSegment> l = {MakeSegment("a", "L", 0, 1000, SegmentLabel::kMale, "x"),
                                  MakeSegment("b", "L", 1500, 2000, SegmentLabel::kMale, "x"),
                                  MakeSegment("c", "L", 9000, 9500, SegmentLabel::kMale, "x")};
  std::vector<SpeechSegment> r = {MakeSegment("r", "R", 0, 3000, SegmentLabel::kMale, "x")};
  PipelineConfig cfg;
  cfg.max_window_segments = 2;
  CHECK(CandidateSlackMs(l, r, cfg) == 8000);
  cfg.max_window_segments = 1;
  CHECK(CandidateSlackMs(l, r, cfg) == 3000);
}

TEST_CASE("matrix tsv round-trips") {
  TempDir dir("matrix");
  const auto inst = RandomMatcherInstance(7);
  const auto m = BuildMatrix(inst.left, inst.right, inst.table, inst.cfg);
  WriteMatrixTsv(dir / "m.tsv", m);
  CHECK(ReadMatrixTsv(dir / "m.tsv", inst.left, inst.right) == m);
  WriteFileAtomic(dir / "bad.tsv", "L0\tnope\t0.5\t1\n");
  CHECK_THROWS_AS(ReadMatrixTsv(dir / "bad.tsv", inst.left, inst.right), Error);
}

}  // TEST_SUITE

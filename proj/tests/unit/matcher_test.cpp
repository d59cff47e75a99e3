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

#include <set>

#include "dubalign/matcher.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/similarity.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::MakeSegment;
using dubalign::testing::MatcherInstance;
using dubalign::testing::OracleMatching;
using dubalign::testing::RandomMatcherInstance;
using dubalign::testing::TempDir;

namespace {

// Letters only, so the tokenizer keeps the word whole.
std::string Word(std::size_t n) {
  std::string w = "q";
  do {
    w += static_cast<char>('a' + n % 26);
    n /= 26;
  } while (n > 0);
  return w;
}

MatchOutcome Run(const MatcherInstance& inst) {
  const auto m = BuildMatrix(inst.left, inst.right, inst.table, inst.cfg);
  return RunMatching(inst.left, inst.right, m, inst.table, inst.cfg);
}

// Items spaced far apart, each with its own orthogonal topic: 1:1 pairs,
// two-member windows on either side, and decoys with unrelated topics.
MatcherInstance PlantedInstance(std::uint64_t seed) {
  Rng rng(seed);
  MatcherInstance inst;
  const std::size_t items = 8 + rng.Below(8);
  std::unordered_map<std::string, std::vector<float>> vectors;
  const std::size_t dim = 2 * items + 2;
  for (std::size_t t = 0; t < dim; ++t) {
    std::vector<float> v(dim, 0.0f);
    v[t] = 1.0f;
    vectors[Word(t)] = v;
  }
  inst.table = EmbeddingTable(dim, vectors);
  Millis cursor = 0;
  std::size_t nl = 0, nr = 0;
  auto add = [&](bool left, Millis start, Millis dur, const std::string& text) {
    auto& side = left ? inst.left : inst.right;
    const std::string id = (left ? "L" : "R") + std::to_string(left ? nl++ : nr++);
    side.push_back(MakeSegment(id, left ? "L" : "R", start, start + dur, SegmentLabel::kMale, text));
    return side.back().span.end_ms();
  };
  for (std::size_t k = 0; k < items; ++k) {
    const std::string topic = Word(2 * k);
    const std::string other = Word(2 * k + 1);
    const Millis eps = static_cast<Millis>(rng.Below(1500));
    Millis end = cursor;
    switch (rng.Below(4)) {
      case 0: {
        const Millis d = 2000 + static_cast<Millis>(rng.Below(4000));
        end = std::max(add(true, cursor, d, topic), add(false, cursor + eps, d + static_cast<Millis>(rng.Below(3000)), topic));
        break;
      }
      case 1:
      case 2: {
        const bool anchor_left = rng.Below(2) == 0;
        const Millis total = 12000 + static_cast<Millis>(rng.Below(3000));
        const Millis m1 = total / 2 - 500;
        const Millis m2 = total - 1500 - m1;
        add(anchor_left, cursor, total, topic + " " + topic);
        const Millis e1 = add(!anchor_left, cursor + eps, m1, topic);
        end = std::max(cursor + total, add(!anchor_left, e1 + 1000, m2, topic));
        break;
      }
      default: {
        const Millis d = 2000 + static_cast<Millis>(rng.Below(4000));
        end = std::max(add(true, cursor, d, topic), add(false, cursor + eps, d, other));
        break;
      }
    }
    cursor = end + 20000;
  }
  inst.cfg.max_start_diff_s = 2.0;
  inst.cfg.max_dur_diff_s = 2.0;
  return inst;
}

}  // namespace

TEST_SUITE("matcher") {

TEST_CASE("time rules are inclusive and similarity is strict") {
  const PipelineConfig cfg;
  const TimeSpan l(0, 10000), r(9000, 11000);  // start +9 s, duration -8 s
  CHECK(RulesSatisfied(l, r, SegmentLabel::kMale, SegmentLabel::kMale, 0.51, cfg).all());
  CHECK_FALSE(RulesSatisfied(l, TimeSpan(9001, 11001), SegmentLabel::kMale, SegmentLabel::kMale, 0.51, cfg).start);
  CHECK_FALSE(RulesSatisfied(l, TimeSpan(9000, 10999), SegmentLabel::kMale, SegmentLabel::kMale, 0.51, cfg).duration);
  const auto v = RulesSatisfied(l, r, SegmentLabel::kMale, SegmentLabel::kMale, 0.5, cfg);
  CHECK_FALSE(v.similarity);
  CHECK(v.start);
  CHECK_FALSE(RulesSatisfied(l, r, SegmentLabel::kFemale, SegmentLabel::kMusic, 1.0, cfg).label);
}

TEST_CASE("combined extent sums member durations from the first start") {
  const auto a = MakeSegment("a", "R", 200, 4000, SegmentLabel::kMale, "x");
  const auto b = MakeSegment("b", "R", 4500, 9800, SegmentLabel::kMale, "x");
  const SpeechSegment* members[] = {&a, &b};
  CHECK(CombinedExtent(members) == TimeSpan(200, 9300));
  CHECK_THROWS_AS(CombinedExtent(std::span<const SpeechSegment* const>{}), Error);
}

TEST_CASE("window combine grows until the concatenated text passes") {
  const auto table = ParseEmbeddings("3 2\nx 1 0\ny 0 1\nz 1 -1\n", "e");
  const PipelineConfig cfg;
  // The first member alone fits the time rules but scores 0; with the
  // second member the mean vector lines up with the anchor.
  const auto anchor = MakeSegment("L0", "L", 0, 10000, SegmentLabel::kMale, "x y");
  const auto a = MakeSegment("R0", "R", 200, 4000, SegmentLabel::kMale, "z");
  const auto b = MakeSegment("R1", "R", 4500, 9800, SegmentLabel::kMale, "y y y");
  const SpeechSegment* cands[] = {&a, &b};
  const auto pair = WindowCombine(anchor, true, cands, table, cfg);
  REQUIRE(pair);
  CHECK(pair->kind == PairKind::kOneToMany);
  CHECK(pair->right == std::vector<std::string>{"R0", "R1"});
  CHECK(pair->score > 0.5);
  CHECK(pair->rules.all());

  const SpeechSegment* single[] = {&b};
  const auto one = WindowCombine(anchor, true, single, table, cfg);
  REQUIRE(one);
  CHECK(one->kind == PairKind::kOneToOne);

  auto female = b;
  female.label = SegmentLabel::kFemale;
  const SpeechSegment* mixed[] = {&a, &female};
  CHECK_FALSE(WindowCombine(anchor, true, mixed, table, cfg));

  const auto far = MakeSegment("R9", "R", 9500, 12000, SegmentLabel::kMale, "x y");
  const SpeechSegment* late[] = {&far};
  CHECK_FALSE(WindowCombine(anchor, true, late, table, cfg));
}

TEST_CASE("missing texts are rejected before scoring") {
  auto s = MakeSegment("L0", "L", 0, 1000, SegmentLabel::kMale, "x");
  s.translation.reset();
  CHECK_THROWS_AS(ScoringText(s, true), Error);
  CHECK(ScoringText(s, false) == "x");
}

TEST_CASE("ties go to the smaller start difference, then the earlier right segment") {
  const auto table = ParseEmbeddings("1 2\nx 1 0\n", "e");
  const PipelineConfig cfg;
  std::vector<SpeechSegment> l = {MakeSegment("L0", "L", 5000, 7000, SegmentLabel::kMale, "x")};
  std::vector<SpeechSegment> r = {MakeSegment("R0", "R", 3000, 5000, SegmentLabel::kMale, "x"),
                                  MakeSegment("R1", "R", 5500, 7500, SegmentLabel::kMale, "x"),
                                  MakeSegment("R2", "R", 8000, 10000, SegmentLabel::kMale, "x")};
  auto m = BuildMatrix(l, r, table, cfg);
  CHECK(RunMatching(l, r, m, table, cfg).pairs.front().right == std::vector<std::string>{"R1"});
  r[1] = MakeSegment("R1", "R", 5500, 6000, SegmentLabel::kMale, "x");
  r[0] = MakeSegment("R0", "R", 3000, 5000, SegmentLabel::kMale, "x");
  r[2] = MakeSegment("R2", "R", 7000, 9000, SegmentLabel::kMale, "x");
  l[0] = MakeSegment("L0", "L", 5000, 7000, SegmentLabel::kMale, "x");
  // R0 and R2 are both 2 s away; R1 is disqualified by label below.
  r[1].label = SegmentLabel::kFemale;
  m = BuildMatrix(l, r, table, cfg);
  CHECK(RunMatching(l, r, m, table, cfg).pairs.front().right == std::vector<std::string>{"R0"});
}

TEST_CASE("empty inputs give an empty outcome") {
  const auto table = ParseEmbeddings("1 1\nx 1\n", "e");
  const PipelineConfig cfg;
  const auto out = RunMatching({}, {}, SimilarityMatrix({}, {}, {}), table, cfg);
  CHECK(out.pairs.empty());
  CHECK(out.unmatched_left.empty());
}

TEST_CASE("non-speech labels are rejected") {
  const auto table = ParseEmbeddings("1 1\nx 1\n", "e");
  std::vector<SpeechSegment> l = {MakeSegment("L0", "L", 0, 1000, SegmentLabel::kNoise, "x")};
  CHECK_THROWS_AS(RunMatching(l, {}, SimilarityMatrix({"L0"}, {}, {}), table, PipelineConfig{}), Error);
}

TEST_CASE("greedy matching equals the exhaustive oracle") {
  std::size_t windows = 0, pairs = 0;
  for (std::uint64_t seed = 1000; seed < 1400; ++seed) {
    const auto inst = RandomMatcherInstance(seed);
    const auto got = Run(inst);
    const auto want = OracleMatching(inst);
    CHECK_MESSAGE(got == want, "seed " << seed);
    CHECK(VerifyOutcome(got, inst.left, inst.right, inst.cfg).empty());
    for (const auto& p : got.pairs) windows += p.kind != PairKind::kOneToOne;
    pairs += got.pairs.size();
  }
  // The instance family must exercise the window tiers, not only 1:1.
  CHECK(windows > 20);
  CHECK(pairs > 400);
}

TEST_CASE("verification catches corrupted outcomes") {
  std::uint64_t seed = 1234;
  while (Run(RandomMatcherInstance(seed)).pairs.empty() || RandomMatcherInstance(seed).left.size() < 3) ++seed;
  const auto inst = RandomMatcherInstance(seed);
  const auto out = Run(inst);
  auto bad = out;
  bad.pairs.front().score = inst.cfg.min_similarity;
  CHECK(VerifyOutcome(bad, inst.left, inst.right, inst.cfg).size() == 1);
  bad = out;
  bad.pairs.push_back(out.pairs.front());
  CHECK_FALSE(VerifyOutcome(bad, inst.left, inst.right, inst.cfg).empty());
  bad = out;
  bad.pairs.front().left = {"nope"};
  CHECK(VerifyOutcome(bad, inst.left, inst.right, inst.cfg).size() == 1);
  bad = out;
  bad.pairs.front().left = {inst.left[0].id, inst.left[2].id};
  CHECK(VerifyOutcome(bad, inst.left, inst.right, inst.cfg).size() >= 1);
}

TEST_CASE("outcome files round-trip") {
  TempDir dir("outcome");
  for (std::uint64_t seed : {3, 17, 99}) {
    const auto inst = RandomMatcherInstance(seed);
    const auto out = Run(inst);
    WriteOutcome(dir / "o.jsonl", out, inst.left, inst.right);
    CHECK(ReadOutcome(dir / "o.jsonl", inst.left, inst.right) == out);
  }
  CHECK(PairId(0) == "P00001");
  CHECK(ParsePairKind("many-to-one") == PairKind::kManyToOne);
  CHECK_FALSE(ParsePairKind("two-to-two"));
}

TEST_CASE("planted items are all recovered and decoys stay unmatched") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = PlantedInstance(seed);
    // Wide enough for every planted 1:1 gap, too narrow for a lone window member.
    inst.cfg.max_dur_diff_s = 3.5;
    const auto out = Run(inst);
    std::set<std::string> left_topics, both;
    for (const auto& s : inst.left) left_topics.insert(Tokenize(*s.translation).front());
    for (const auto& s : inst.right) {
      if (left_topics.count(Tokenize(*s.transcript).front())) both.insert(Tokenize(*s.transcript).front());
    }
    CHECK(out.pairs.size() == both.size());
    for (const auto& p : out.pairs) {
      // Every emitted pair shares one topic word across both sides.
      CHECK(Tokenize(*inst.left[std::stoul(p.left[0].substr(1))].translation).front() ==
            Tokenize(*inst.right[std::stoul(p.right[0].substr(1))].transcript).front());
    }
    CHECK(VerifyOutcome(out, inst.left, inst.right, inst.cfg).empty());
  }
}

TEST_CASE("loosening time thresholds never loses pairs on planted instances") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = PlantedInstance(seed);
    std::size_t prev = 0;
    for (double start : {0.5, 1.0, 2.0, 4.0}) {
      for (double dur : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        inst.cfg.max_start_diff_s = start;
        inst.cfg.max_dur_diff_s = dur;
        const std::size_t n = Run(inst).pairs.size();
        if (dur == 0.5) {
          CHECK(n >= prev);
          prev = n;
        }
        auto looser = inst;
        looser.cfg.max_dur_diff_s = dur * 2;
        CHECK(Run(looser).pairs.size() >= n);
        looser = inst;
        looser.cfg.max_start_diff_s = start * 2;
        CHECK(Run(looser).pairs.size() >= n);
      }
    }
  }
}

}  // TEST_SUITE

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

#include "dubalign/matcher.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dubalign/segment_io.hpp"

namespace dubalign {

using nlohmann::json;

namespace {

Millis AbsDiff(Millis a, Millis b) { return a > b ? a - b : b - a; }

struct Candidate {
  SegmentPair pair;
  Millis start_diff = 0;
  std::size_t right_index = 0;
  std::vector<std::size_t> left_members;
  std::vector<std::size_t> right_members;
};

// Higher score, then smaller start difference, then earlier right segment.
bool Better(const Candidate& a, const Candidate& b) {
  if (a.pair.score != b.pair.score) return a.pair.score > b.pair.score;
  if (a.start_diff != b.start_diff) return a.start_diff < b.start_diff;
  return a.right_index < b.right_index;
}

void Offer(std::optional<Candidate>& best, Candidate c) {
  if (!best || Better(c, *best)) best = std::move(c);
}

std::unordered_map<std::string, std::size_t> IndexById(const std::vector<SpeechSegment>& segs) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < segs.size(); ++i) idx.emplace(segs[i].id, i);
  return idx;
}

json SideToJson(const std::vector<std::string>& ids, const std::vector<SpeechSegment>& segs,
                const std::unordered_map<std::string, std::size_t>& index) {
  json spans = json::array();
  std::string label;
  for (const auto& id : ids) {
    const auto& s = segs.at(index.at(id));
    spans.push_back({s.span.start_ms(), s.span.end_ms()});
    label = LabelName(s.label);
  }
  return {{"ids", ids}, {"spans", spans}, {"label", label}};
}

}  // namespace

std::string_view PairKindName(PairKind kind) {
  switch (kind) {
    case PairKind::kOneToOne: return "one-to-one";
    case PairKind::kOneToMany: return "one-to-many";
    case PairKind::kManyToOne: return "many-to-one";
  }
  return "?";
}

std::optional<PairKind> ParsePairKind(std::string_view name) {
  for (PairKind k : {PairKind::kOneToOne, PairKind::kOneToMany, PairKind::kManyToOne}) {
    if (PairKindName(k) == name) return k;
  }
  return std::nullopt;
}

RuleVerdicts RulesSatisfied(const TimeSpan& left, const TimeSpan& right, SegmentLabel left_label,
                            SegmentLabel right_label, double score, const PipelineConfig& cfg) {
  RuleVerdicts v;
  v.start = AbsDiff(left.start_ms(), right.start_ms()) <= cfg.max_start_diff_ms();
  v.duration = AbsDiff(left.duration_ms(), right.duration_ms()) <= cfg.max_dur_diff_ms();
  v.label = left_label == right_label;
  v.similarity = score > cfg.min_similarity;
  return v;
}

TimeSpan CombinedExtent(std::span<const SpeechSegment* const> members) {
  if (members.empty()) Fail(ErrorKind::kValidation, "empty pair side");
  Millis total = 0;
  for (const auto* m : members) total += m->span.duration_ms();
  const Millis start = members.front()->span.start_ms();
  return TimeSpan(start, start + total);
}

const std::string& ScoringText(const SpeechSegment& s, bool left_side) {
  const auto& text = left_side ? s.translation : s.transcript;
  if (!text) {
    Fail(ErrorKind::kValidation, "segment " + s.id + (left_side ? " has no translation" : " has no transcript"));
  }
  return *text;
}

std::optional<SegmentPair> WindowCombine(const SpeechSegment& anchor, bool anchor_is_left,
                                         std::span<const SpeechSegment* const> candidates,
                                         const EmbeddingTable& table, const PipelineConfig& cfg) {
  if (candidates.empty()) return std::nullopt;
  if (AbsDiff(candidates.front()->span.start_ms(), anchor.span.start_ms()) > cfg.max_start_diff_ms()) {
    return std::nullopt;
  }
  const std::string& anchor_text = ScoringText(anchor, anchor_is_left);
  const Millis limit = anchor.span.duration_ms() + cfg.max_dur_diff_ms();
  const std::size_t max_members =
      std::min(candidates.size(), static_cast<std::size_t>(cfg.max_window_segments));
  Millis cumulative = 0;
  std::string joined;
  for (std::size_t k = 0; k < max_members; ++k) {
    const SpeechSegment& m = *candidates[k];
    if (m.label != anchor.label) break;
    cumulative += m.span.duration_ms();
    if (cumulative > limit) break;
    if (k > 0) joined += ' ';
    joined += ScoringText(m, !anchor_is_left);

    const auto members = candidates.first(k + 1);
    const TimeSpan extent = CombinedExtent(members);
    const TimeSpan& left_extent = anchor_is_left ? anchor.span : extent;
    const TimeSpan& right_extent = anchor_is_left ? extent : anchor.span;
    // Score only windows that already pass the time rules.
    RuleVerdicts v = RulesSatisfied(left_extent, right_extent, anchor.label, m.label, 0.0, cfg);
    if (!v.start || !v.duration) continue;
    const double score = TextSimilarity(anchor_text, joined, table);
    v = RulesSatisfied(left_extent, right_extent, anchor.label, m.label, score, cfg);
    if (!v.all()) continue;

    SegmentPair pair;
    pair.score = score;
    pair.rules = v;
    std::vector<std::string> ids;
    for (const auto* s : members) ids.push_back(s->id);
    if (anchor_is_left) {
      pair.left = {anchor.id};
      pair.right = std::move(ids);
      pair.kind = k == 0 ? PairKind::kOneToOne : PairKind::kOneToMany;
    } else {
      pair.left = std::move(ids);
      pair.right = {anchor.id};
      pair.kind = k == 0 ? PairKind::kOneToOne : PairKind::kManyToOne;
    }
    return pair;
  }
  return std::nullopt;
}

MatchOutcome RunMatching(const std::vector<SpeechSegment>& left,
                         const std::vector<SpeechSegment>& right, const SimilarityMatrix& matrix,
                         const EmbeddingTable& table, const PipelineConfig& cfg) {
  CheckChronological(left);
  CheckChronological(right);
  for (const auto& s : left) {
    if (!IsMatchable(s.label)) Fail(ErrorKind::kValidation, "segment " + s.id + " is not female/male/music");
  }
  for (const auto& s : right) {
    if (!IsMatchable(s.label)) Fail(ErrorKind::kValidation, "segment " + s.id + " is not female/male/music");
  }
  const Millis max_start = cfg.max_start_diff_ms();
  const auto max_window = static_cast<std::size_t>(cfg.max_window_segments);
  std::vector<bool> used_left(left.size(), false), used_right(right.size(), false);
  MatchOutcome out;

  // Right segments whose start lies within max_start of `t`.
  auto right_near = [&](Millis t) {
    auto lo = std::lower_bound(right.begin(), right.end(), t - max_start,
                               [](const SpeechSegment& s, Millis v) { return s.span.start_ms() < v; });
    auto hi = std::upper_bound(right.begin(), right.end(), t + max_start,
                               [](Millis v, const SpeechSegment& s) { return v < s.span.start_ms(); });
    return std::pair<std::size_t, std::size_t>(lo - right.begin(), hi - right.begin());
  };
  auto run_from = [&](const std::vector<SpeechSegment>& side, const std::vector<bool>& used,
                      std::size_t first) {
    std::vector<const SpeechSegment*> run;
    for (std::size_t k = first; k < side.size() && run.size() < max_window && !used[k]; ++k) {
      run.push_back(&side[k]);
    }
    return run;
  };

  for (std::size_t i = 0; i < left.size(); ++i) {
    if (used_left[i]) continue;
    const SpeechSegment& a = left[i];
    std::optional<Candidate> best;

    for (const auto& e : matrix.Row(i)) {
      if (used_right[e.col]) continue;
      const SpeechSegment& b = right[e.col];
      const RuleVerdicts v = RulesSatisfied(a.span, b.span, a.label, b.label, e.score, cfg);
      if (!v.all()) continue;
      Candidate c;
      c.pair = {{a.id}, {b.id}, e.score, PairKind::kOneToOne, v};
      c.start_diff = AbsDiff(a.span.start_ms(), b.span.start_ms());
      c.right_index = e.col;
      c.left_members = {i};
      c.right_members = {e.col};
      Offer(best, std::move(c));
    }

    const auto [near_lo, near_hi] = right_near(a.span.start_ms());
    if (!best) {
      for (std::size_t j = near_lo; j < near_hi; ++j) {
        if (used_right[j] || right[j].label != a.label) continue;
        const auto run = run_from(right, used_right, j);
        auto pair = WindowCombine(a, true, run, table, cfg);
        if (!pair) continue;
        Candidate c;
        c.start_diff = AbsDiff(a.span.start_ms(), right[j].span.start_ms());
        c.right_index = j;
        c.left_members = {i};
        for (std::size_t k = 0; k < pair->right.size(); ++k) c.right_members.push_back(j + k);
        c.pair = std::move(*pair);
        Offer(best, std::move(c));
      }
    }

    if (!best) {
      const auto run = run_from(left, used_left, i);
      for (std::size_t j = near_lo; j < near_hi; ++j) {
        if (used_right[j] || right[j].label != a.label) continue;
        auto pair = WindowCombine(right[j], false, run, table, cfg);
        if (!pair) continue;
        Candidate c;
        c.start_diff = AbsDiff(a.span.start_ms(), right[j].span.start_ms());
        c.right_index = j;
        for (std::size_t k = 0; k < pair->left.size(); ++k) c.left_members.push_back(i + k);
        c.right_members = {j};
        c.pair = std::move(*pair);
        Offer(best, std::move(c));
      }
    }

    if (best) {
      for (std::size_t k : best->left_members) used_left[k] = true;
      for (std::size_t k : best->right_members) used_right[k] = true;
      out.pairs.push_back(std::move(best->pair));
    }
  }
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (!used_left[i]) out.unmatched_left.push_back(left[i].id);
  }
  for (std::size_t j = 0; j < right.size(); ++j) {
    if (!used_right[j]) out.unmatched_right.push_back(right[j].id);
  }
  return out;
}

std::vector<SegmentPair> VerifyOutcome(const MatchOutcome& outcome,
                                       const std::vector<SpeechSegment>& left,
                                       const std::vector<SpeechSegment>& right,
                                       const PipelineConfig& cfg) {
  const auto lidx = IndexById(left);
  const auto ridx = IndexById(right);
  std::unordered_set<std::string> seen;
  std::vector<SegmentPair> bad;
  auto resolve = [](const std::vector<std::string>& ids, const std::vector<SpeechSegment>& segs,
                    const std::unordered_map<std::string, std::size_t>& idx,
                    std::vector<const SpeechSegment*>& members) {
    std::size_t prev = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto it = idx.find(ids[k]);
      if (it == idx.end()) return false;
      if (k > 0 && it->second != prev + 1) return false;
      prev = it->second;
      members.push_back(&segs[it->second]);
    }
    return !members.empty();
  };
  for (const auto& p : outcome.pairs) {
    std::vector<const SpeechSegment*> lm, rm;
    bool ok = resolve(p.left, left, lidx, lm) && resolve(p.right, right, ridx, rm);
    ok = ok && (lm.size() == 1 || rm.size() == 1);
    if (ok) {
      const SegmentLabel label = lm.front()->label;
      for (const auto* s : lm) ok = ok && s->label == label;
      for (const auto* s : rm) ok = ok && s->label == label;
      const RuleVerdicts v = RulesSatisfied(CombinedExtent(lm), CombinedExtent(rm), label,
                                            rm.front()->label, p.score, cfg);
      ok = ok && v.all() && p.score <= 1.0;
    }
    for (const auto& id : p.left) ok = seen.insert("L|" + id).second && ok;
    for (const auto& id : p.right) ok = seen.insert("R|" + id).second && ok;
    if (!ok) bad.push_back(p);
  }
  return bad;
}

std::string PairId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "P%05zu", index + 1);
  return buf;
}

void WriteOutcome(const std::filesystem::path& path, const MatchOutcome& outcome,
                  const std::vector<SpeechSegment>& left, const std::vector<SpeechSegment>& right) {
  const auto lidx = IndexById(left);
  const auto ridx = IndexById(right);
  std::string out;
  for (std::size_t k = 0; k < outcome.pairs.size(); ++k) {
    const auto& p = outcome.pairs[k];
    const json j = {{"pair_id", PairId(k)},
                    {"kind", std::string(PairKindName(p.kind))},
                    {"score", p.score},
                    {"left", SideToJson(p.left, left, lidx)},
                    {"right", SideToJson(p.right, right, ridx)},
                    {"rules",
                     {{"start", p.rules.start},
                      {"duration", p.rules.duration},
                      {"label", p.rules.label},
                      {"similarity", p.rules.similarity}}}};
    out += j.dump() + "\n";
  }
  WriteFileAtomic(path, out);
}

MatchOutcome ReadOutcome(const std::filesystem::path& path, const std::vector<SpeechSegment>& left,
                         const std::vector<SpeechSegment>& right) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "match outcome not found: " + path.string());
  MatchOutcome out;
  std::unordered_set<std::string> used;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      SegmentPair p;
      p.left = j.at("left").at("ids").get<std::vector<std::string>>();
      p.right = j.at("right").at("ids").get<std::vector<std::string>>();
      p.score = j.at("score").get<double>();
      const auto kind = ParsePairKind(j.at("kind").get<std::string>());
      if (!kind) Fail(ErrorKind::kValidation, "unknown pair kind");
      p.kind = *kind;
      const auto& r = j.at("rules");
      p.rules = {r.at("start").get<bool>(), r.at("duration").get<bool>(), r.at("label").get<bool>(),
                 r.at("similarity").get<bool>()};
      for (const auto& id : p.left) used.insert("L|" + id);
      for (const auto& id : p.right) used.insert("R|" + id);
      out.pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kValidation, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& s : left) {
    if (!used.count("L|" + s.id)) out.unmatched_left.push_back(s.id);
  }
  for (const auto& s : right) {
    if (!used.count("R|" + s.id)) out.unmatched_right.push_back(s.id);
  }
  return out;
}

}  // namespace dubalign

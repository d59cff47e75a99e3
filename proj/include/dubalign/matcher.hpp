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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dubalign/config.hpp"
#include "dubalign/core.hpp"
#include "dubalign/similarity.hpp"

namespace dubalign {

enum class PairKind { kOneToOne, kOneToMany, kManyToOne };
std::string_view PairKindName(PairKind kind);
std::optional<PairKind> ParsePairKind(std::string_view name);

struct RuleVerdicts {
  bool start = false;       // |start difference| <= max_start_diff_s
  bool duration = false;    // |duration difference| <= max_dur_diff_s
  bool label = false;       // same label on both sides
  bool similarity = false;  // score > min_similarity
  bool all() const { return start && duration && label && similarity; }
  bool operator==(const RuleVerdicts&) const = default;
};

// Time thresholds are inclusive, the similarity threshold is strict.
RuleVerdicts RulesSatisfied(const TimeSpan& left, const TimeSpan& right, SegmentLabel left_label,
                            SegmentLabel right_label, double score, const PipelineConfig& cfg);

// Start of the first member and summed member durations, as one span. This is
// the extent Rules 1 and 2 are evaluated on for a multi-segment side.
TimeSpan CombinedExtent(std::span<const SpeechSegment* const> members);

struct SegmentPair {
  std::vector<std::string> left;   // translated-track ids, consecutive in track order
  std::vector<std::string> right;  // transcribed-track ids, consecutive in track order
  double score = 0.0;
  PairKind kind = PairKind::kOneToOne;
  RuleVerdicts rules;
  bool operator==(const SegmentPair&) const = default;
};

struct MatchOutcome {
  std::vector<SegmentPair> pairs;  // sorted by left start time
  std::vector<std::string> unmatched_left;
  std::vector<std::string> unmatched_right;
  bool operator==(const MatchOutcome&) const = default;
};

// Text a segment contributes to scoring: the translation on the left side,
// the transcript on the right side.
const std::string& ScoringText(const SpeechSegment& s, bool left_side);

// Grows a window over `candidates` (consecutive segments of the other side,
// starting with the segment the window must begin at) while the summed
// duration stays within anchor duration + max_dur_diff_s, at most
// max_window_segments members, all sharing the anchor's label. Returns the
// first window that satisfies Rules 1-4 with its score recomputed on the
// members' concatenated text.
std::optional<SegmentPair> WindowCombine(const SpeechSegment& anchor, bool anchor_is_left,
                                         std::span<const SpeechSegment* const> candidates,
                                         const EmbeddingTable& table, const PipelineConfig& cfg);

// Chronological greedy over the left segments. For each unconsumed left
// segment: best 1:1 candidate from the matrix; failing that, best window
// anchored on the left segment (one-to-many); failing that, best window of
// left segments starting at it against a right anchor (many-to-one). Ties go
// to the higher score, then the smaller start difference, then the earlier
// right segment.
MatchOutcome RunMatching(const std::vector<SpeechSegment>& left,
                         const std::vector<SpeechSegment>& right, const SimilarityMatrix& matrix,
                         const EmbeddingTable& table, const PipelineConfig& cfg);

// Re-checks every pair from the outcome alone; returns the violating pairs.
std::vector<SegmentPair> VerifyOutcome(const MatchOutcome& outcome,
                                       const std::vector<SpeechSegment>& left,
                                       const std::vector<SpeechSegment>& right,
                                       const PipelineConfig& cfg);

std::string PairId(std::size_t index);

// One JSON object per pair: ids, spans, label, kind, score and rule verdicts.
void WriteOutcome(const std::filesystem::path& path, const MatchOutcome& outcome,
                  const std::vector<SpeechSegment>& left, const std::vector<SpeechSegment>& right);
// Unmatched lists are rebuilt from the segment sets.
MatchOutcome ReadOutcome(const std::filesystem::path& path, const std::vector<SpeechSegment>& left,
                         const std::vector<SpeechSegment>& right);

}  // namespace dubalign

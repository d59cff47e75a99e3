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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dubalign/core.hpp"
#include "dubalign/corpus.hpp"

namespace dubalign {

// 3-point scale: 1 same meaning, 0.5 semantic match, 0 no match.
bool IsValidScore(double score);
// 0, 1, 2 for scores 0, 0.5, 1.
std::size_t ScoreCategory(double score);

struct Rating {
  std::string pair_id;
  std::string annotator;
  double score = 0.0;
  std::int64_t timestamp_ms = 0;
  bool operator==(const Rating&) const = default;
};

// Append-only JSONL log; on load the last event per (pair, annotator) wins.
// Writes are serialized and flushed before Record returns.
class RatingStore {
 public:
  // An empty `known_pairs` accepts any pair id.
  RatingStore(const std::filesystem::path& path, std::set<std::string> known_pairs = {});

  void Record(Rating r);
  // Snapshot ordered by (pair, annotator).
  std::vector<Rating> Ratings() const;
  std::optional<double> Find(const std::string& pair_id, const std::string& annotator) const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  std::set<std::string> known_pairs_;
  std::map<std::pair<std::string, std::string>, Rating> ratings_;
  std::ofstream log_;
  mutable std::mutex mu_;
};

std::vector<Rating> ReadRatings(const std::filesystem::path& path);

struct DurationFilter {
  double min_s = 2.0;
  double max_s = 10.0;
};

// Uniform sample without replacement, reproducible from `seed`. With a
// filter, both sides of a pair must fall inside [min_s, max_s].
std::vector<std::string> SamplePairs(const std::vector<PairManifestEntry>& pairs, std::size_t n,
                                     std::uint64_t seed,
                                     std::optional<DurationFilter> filter = std::nullopt);

// Kappa over the 3 score categories on the items both annotators rated.
double CohenKappa(const std::map<std::string, double>& a, const std::map<std::string, double>& b);
// Aligned rating vectors.
double CohenKappa(const std::vector<double>& a, const std::vector<double>& b);

using ScoreCounts = std::array<std::size_t, 3>;  // indexed by ScoreCategory

double AccuracyFromCounts(const ScoreCounts& counts);

struct AnnotatorSummary {
  std::string annotator;
  ScoreCounts counts{};
  double accuracy = 0.0;
};

struct KappaEntry {
  std::string first;
  std::string second;
  std::size_t common = 0;
  std::optional<double> kappa;  // absent with fewer than 2 common items
};

struct AgreementReport {
  std::size_t total = 0;  // pairs with at least one rating
  ScoreCounts counts{};   // consensus score per pair: the lowest given
  std::map<std::string, ScoreCounts> by_label;
  double accuracy = 0.0;
  std::vector<AnnotatorSummary> annotators;
  std::vector<KappaEntry> kappas;
};

// `labels` maps pair id to the pair's label name.
AgreementReport BuildReport(const std::vector<Rating>& ratings,
                            const std::map<std::string, std::string>& labels);
nlohmann::json ReportToJson(const AgreementReport& r);
std::string FormatReport(const AgreementReport& r);

}  // namespace dubalign

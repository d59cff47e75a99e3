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

#include "dubalign/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "dubalign/config.hpp"
#include "dubalign/rng.hpp"
#include "dubalign/segment_io.hpp"

namespace dubalign {

using nlohmann::json;

namespace {

Rating RatingFromJson(const json& j) {
  Rating r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.annotator = j.at("annotator").get<std::string>();
  r.score = j.at("score").get<double>();
  r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
  return r;
}

json RatingToJson(const Rating& r) {
  return {{"pair_id", r.pair_id},
          {"annotator", r.annotator},
          {"score", r.score},
          {"timestamp_ms", r.timestamp_ms}};
}

void LoadEvents(const std::filesystem::path& path, std::vector<Rating>& out) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // A torn final line from an interrupted append is ignored.
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    try {
      out.push_back(RatingFromJson(j));
    } catch (const json::exception&) {
      continue;
    }
  }
}

json CountsToJson(const ScoreCounts& c) {
  return {{"1", c[2]}, {"0.5", c[1]}, {"0", c[0]}};
}

}  // namespace

bool IsValidScore(double score) { return score == 0.0 || score == 0.5 || score == 1.0; }

std::size_t ScoreCategory(double score) {
  if (!IsValidScore(score)) {
    Fail(ErrorKind::kValidation, "score must be 0, 0.5 or 1, got " + FormatDouble(score));
  }
  return static_cast<std::size_t>(score * 2.0);
}

RatingStore::RatingStore(const std::filesystem::path& path, std::set<std::string> known_pairs)
    : path_(path), known_pairs_(std::move(known_pairs)) {
  if (std::filesystem::exists(path)) {
    std::vector<Rating> events;
    LoadEvents(path, events);
    for (auto& r : events) {
      if (!IsValidScore(r.score)) continue;
      ratings_[{r.pair_id, r.annotator}] = r;
    }
  }
  log_ = OpenAppendLog(path);
}

void RatingStore::Record(Rating r) {
  ScoreCategory(r.score);
  if (r.annotator.empty()) Fail(ErrorKind::kValidation, "annotator id must be non-empty");
  if (!known_pairs_.empty() && !known_pairs_.count(r.pair_id)) {
    Fail(ErrorKind::kMissingArtifact, "unknown pair " + r.pair_id);
  }
  if (r.timestamp_ms == 0) {
    r.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  }
  std::lock_guard lock(mu_);
  log_ << RatingToJson(r).dump() << '\n';
  log_.flush();
  if (!log_) Fail(ErrorKind::kIo, "cannot append to " + path_.string());
  ratings_[{r.pair_id, r.annotator}] = std::move(r);
}

std::vector<Rating> RatingStore::Ratings() const {
  std::lock_guard lock(mu_);
  std::vector<Rating> out;
  out.reserve(ratings_.size());
  for (const auto& [key, r] : ratings_) out.push_back(r);
  return out;
}

std::optional<double> RatingStore::Find(const std::string& pair_id, const std::string& annotator) const {
  std::lock_guard lock(mu_);
  auto it = ratings_.find({pair_id, annotator});
  if (it == ratings_.end()) return std::nullopt;
  return it->second.score;
}

std::size_t RatingStore::size() const {
  std::lock_guard lock(mu_);
  return ratings_.size();
}

std::vector<Rating> ReadRatings(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    Fail(ErrorKind::kMissingArtifact, "rating log not found: " + path.string());
  }
  std::vector<Rating> events;
  LoadEvents(path, events);
  std::map<std::pair<std::string, std::string>, Rating> latest;
  for (auto& r : events) {
    if (IsValidScore(r.score)) latest[{r.pair_id, r.annotator}] = r;
  }
  std::vector<Rating> out;
  for (auto& [key, r] : latest) out.push_back(r);
  return out;
}

std::vector<std::string> SamplePairs(const std::vector<PairManifestEntry>& pairs, std::size_t n,
                                     std::uint64_t seed, std::optional<DurationFilter> filter) {
  std::vector<std::string> pool;
  for (const auto& p : pairs) {
    if (filter) {
      const bool ok = [&] {
        for (const PairSide* s : {&p.left, &p.right}) {
          const double d = MillisToSeconds(s->duration_ms);
          if (d < filter->min_s || d > filter->max_s) return false;
        }
        return true;
      }();
      if (!ok) continue;
    }
    pool.push_back(p.pair_id);
  }
  if (n > pool.size()) {
    Fail(ErrorKind::kValidation, "cannot sample " + std::to_string(n) + " pairs from " +
                                     std::to_string(pool.size()) + " available");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

double CohenKappa(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) Fail(ErrorKind::kValidation, "rating vectors differ in length");
  if (a.size() < 2) Fail(ErrorKind::kValidation, "kappa needs at least 2 common items");
  const double n = static_cast<double>(a.size());
  std::array<double, 3> ma{}, mb{};
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ca = ScoreCategory(a[i]);
    const auto cb = ScoreCategory(b[i]);
    ma[ca] += 1.0;
    mb[cb] += 1.0;
    if (ca == cb) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (std::size_t c = 0; c < 3; ++c) pe += (ma[c] / n) * (mb[c] / n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double CohenKappa(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  std::vector<double> va, vb;
  for (const auto& [id, score] : a) {
    auto it = b.find(id);
    if (it == b.end()) continue;
    va.push_back(score);
    vb.push_back(it->second);
  }
  if (va.empty()) Fail(ErrorKind::kValidation, "the two annotators rated disjoint pair sets");
  return CohenKappa(va, vb);
}

double AccuracyFromCounts(const ScoreCounts& counts) {
  const std::size_t total = counts[0] + counts[1] + counts[2];
  if (total == 0) return 0.0;
  return static_cast<double>(counts[1] + counts[2]) / static_cast<double>(total);
}

AgreementReport BuildReport(const std::vector<Rating>& ratings,
                            const std::map<std::string, std::string>& labels) {
  std::map<std::string, std::map<std::string, double>> by_annotator;
  std::map<std::string, double> consensus;
  for (const auto& r : ratings) {
    ScoreCategory(r.score);
    by_annotator[r.annotator][r.pair_id] = r.score;
    auto [it, inserted] = consensus.emplace(r.pair_id, r.score);
    if (!inserted) it->second = std::min(it->second, r.score);
  }
  AgreementReport rep;
  rep.total = consensus.size();
  for (const auto& [id, score] : consensus) {
    const auto c = ScoreCategory(score);
    ++rep.counts[c];
    auto it = labels.find(id);
    ++rep.by_label[it == labels.end() ? "unknown" : it->second][c];
  }
  rep.accuracy = AccuracyFromCounts(rep.counts);
  for (const auto& [name, scores] : by_annotator) {
    AnnotatorSummary s;
    s.annotator = name;
    for (const auto& [id, score] : scores) ++s.counts[ScoreCategory(score)];
    s.accuracy = AccuracyFromCounts(s.counts);
    rep.annotators.push_back(s);
  }
  for (auto i = by_annotator.begin(); i != by_annotator.end(); ++i) {
    for (auto j = std::next(i); j != by_annotator.end(); ++j) {
      KappaEntry k;
      k.first = i->first;
      k.second = j->first;
      for (const auto& [id, score] : i->second) k.common += j->second.count(id);
      if (k.common >= 2) k.kappa = CohenKappa(i->second, j->second);
      rep.kappas.push_back(k);
    }
  }
  return rep;
}

json ReportToJson(const AgreementReport& r) {
  json by_label = json::object();
  for (const auto& [label, c] : r.by_label) by_label[label] = CountsToJson(c);
  json annotators = json::array();
  for (const auto& a : r.annotators) {
    annotators.push_back({{"annotator", a.annotator},
                          {"counts", CountsToJson(a.counts)},
                          {"rated", a.counts[0] + a.counts[1] + a.counts[2]},
                          {"accuracy", a.accuracy}});
  }
  json kappas = json::array();
  for (const auto& k : r.kappas) {
    kappas.push_back({{"first", k.first},
                      {"second", k.second},
                      {"common", k.common},
                      {"kappa", k.kappa ? json(*k.kappa) : json(nullptr)}});
  }
  return {{"total", r.total},
          {"counts", CountsToJson(r.counts)},
          {"by_label", by_label},
          {"accuracy", r.accuracy},
          {"consensus", "lowest score per pair"},
          {"annotators", annotators},
          {"kappas", kappas}};
}

std::string FormatReport(const AgreementReport& r) {
  std::string out;
  char buf[160];
  out += "score\ttotal";
  for (const auto& [label, c] : r.by_label) out += "\t" + label;
  out += "\n";
  const char* names[3] = {"0", "0.5", "1"};
  for (int c = 2; c >= 0; --c) {
    out += std::string(names[c]) + "\t" + std::to_string(r.counts[c]);
    for (const auto& [label, counts] : r.by_label) out += "\t" + std::to_string(counts[c]);
    out += "\n";
  }
  std::snprintf(buf, sizeof(buf), "consensus accuracy (lowest score per pair): %.4f over %zu pairs\n",
                r.accuracy, r.total);
  out += buf;
  for (const auto& a : r.annotators) {
    std::snprintf(buf, sizeof(buf), "annotator %s accuracy: %.4f\n", a.annotator.c_str(), a.accuracy);
    out += buf;
  }
  for (const auto& k : r.kappas) {
    if (k.kappa) {
      std::snprintf(buf, sizeof(buf), "kappa %s/%s: %.6f over %zu common pairs\n", k.first.c_str(),
                    k.second.c_str(), *k.kappa, k.common);
    } else {
      std::snprintf(buf, sizeof(buf), "kappa %s/%s: n/a (%zu common pairs)\n", k.first.c_str(),
                    k.second.c_str(), k.common);
    }
    out += buf;
  }
  return out;
}

}  // namespace dubalign

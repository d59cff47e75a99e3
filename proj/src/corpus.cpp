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

#include "dubalign/corpus.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "dubalign/parallel.hpp"
#include "dubalign/segment_io.hpp"

namespace dubalign {

using nlohmann::json;

namespace {

json OptionalText(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> TextFromJson(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

PairSide BuildSide(const std::vector<std::string>& ids, const std::vector<SpeechSegment>& segs,
                   const std::unordered_map<std::string, std::size_t>& index) {
  PairSide side;
  side.ids = ids;
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) Fail(ErrorKind::kValidation, "pair references unknown segment " + id);
    const SpeechSegment& s = segs[it->second];
    side.track = s.track;
    side.language = s.language;
    side.label = s.label;
    side.spans.push_back(s.span);
    side.transcripts.push_back(s.transcript);
    side.translations.push_back(s.translation);
    side.duration_ms += s.span.duration_ms();
  }
  if (ids.empty()) Fail(ErrorKind::kValidation, "pair side without segments");
  return side;
}

json SideToJson(const PairSide& s) {
  json spans = json::array(), transcripts = json::array(), translations = json::array();
  for (const auto& sp : s.spans) spans.push_back({sp.start_ms(), sp.end_ms()});
  for (const auto& t : s.transcripts) transcripts.push_back(OptionalText(t));
  for (const auto& t : s.translations) translations.push_back(OptionalText(t));
  return {{"track", s.track.str()},
          {"language", s.language},
          {"label", std::string(LabelName(s.label))},
          {"ids", s.ids},
          {"spans", spans},
          {"transcripts", transcripts},
          {"translations", translations},
          {"audio", s.audio},
          {"duration_ms", s.duration_ms}};
}

PairSide SideFromJson(const json& j) {
  PairSide s;
  s.track = TrackId(j.at("track").get<std::string>());
  s.language = j.at("language").get<std::string>();
  const auto label = ParseLabel(j.at("label").get<std::string>());
  if (!label) Fail(ErrorKind::kValidation, "unknown label in manifest");
  s.label = *label;
  s.ids = j.at("ids").get<std::vector<std::string>>();
  for (const auto& sp : j.at("spans")) s.spans.emplace_back(sp.at(0).get<Millis>(), sp.at(1).get<Millis>());
  for (const auto& t : j.at("transcripts")) s.transcripts.push_back(TextFromJson(t));
  for (const auto& t : j.at("translations")) s.translations.push_back(TextFromJson(t));
  s.audio = j.at("audio").get<std::string>();
  s.duration_ms = j.at("duration_ms").get<Millis>();
  return s;
}

std::unordered_map<std::string, std::size_t> IndexById(const std::vector<SpeechSegment>& segs) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < segs.size(); ++i) idx.emplace(segs[i].id, i);
  return idx;
}

std::vector<std::int16_t> Concatenate(const PairSide& side, const AudioTrack& audio) {
  std::vector<std::int16_t> out;
  for (const auto& span : side.spans) {
    const auto part = audio.Slice(span);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

Millis SideDuration(const std::vector<std::string>& ids, const std::vector<SpeechSegment>& segs,
                    const std::unordered_map<std::string, std::size_t>& index) {
  Millis total = 0;
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) Fail(ErrorKind::kValidation, "pair references unknown segment " + id);
    total += segs[it->second].span.duration_ms();
  }
  return total;
}

}  // namespace

std::vector<PairManifestEntry> ManifestEntries(const MatchOutcome& outcome,
                                               const std::vector<SpeechSegment>& left,
                                               const std::vector<SpeechSegment>& right) {
  const auto lidx = IndexById(left);
  const auto ridx = IndexById(right);
  std::vector<PairManifestEntry> out;
  for (std::size_t k = 0; k < outcome.pairs.size(); ++k) {
    const auto& p = outcome.pairs[k];
    PairManifestEntry e;
    e.pair_id = PairId(k);
    e.kind = p.kind;
    e.score = p.score;
    e.left = BuildSide(p.left, left, lidx);
    e.right = BuildSide(p.right, right, ridx);
    e.left.audio = "audio/" + e.pair_id + "_left.wav";
    e.right.audio = "audio/" + e.pair_id + "_right.wav";
    out.push_back(std::move(e));
  }
  return out;
}

std::filesystem::path ExportPairs(const MatchOutcome& outcome,
                                  const std::vector<SpeechSegment>& left,
                                  const std::vector<SpeechSegment>& right,
                                  const AudioTrack& left_audio, const AudioTrack& right_audio,
                                  const std::filesystem::path& out_dir, int jobs) {
  const auto entries = ManifestEntries(outcome, left, right);
  for (const auto& e : entries) {
    if (e.left.track != left_audio.track || e.right.track != right_audio.track) {
      Fail(ErrorKind::kValidation, "pair " + e.pair_id + " does not belong to the given audio tracks");
    }
  }
  const auto audio_dir = out_dir / "audio";
  try {
    std::filesystem::remove_all(audio_dir);
    std::filesystem::create_directories(audio_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    Fail(ErrorKind::kIo, "cannot prepare corpus directory " + out_dir.string() + ": " + e.what());
  }
  ParallelFor(entries.size(), jobs, [&](std::size_t k) {
    const auto& e = entries[k];
    WriteWav(out_dir / e.left.audio, Concatenate(e.left, left_audio));
    WriteWav(out_dir / e.right.audio, Concatenate(e.right, right_audio));
  });
  std::string manifest;
  for (const auto& e : entries) {
    const json j = {{"pair_id", e.pair_id},
                    {"kind", std::string(PairKindName(e.kind))},
                    {"score", e.score},
                    {"left", SideToJson(e.left)},
                    {"right", SideToJson(e.right)}};
    manifest += j.dump() + "\n";
  }
  const auto path = out_dir / "manifest.jsonl";
  WriteFileAtomic(path, manifest);
  return path;
}

std::vector<PairManifestEntry> LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "corpus manifest not found: " + path.string());
  std::vector<PairManifestEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      PairManifestEntry e;
      e.pair_id = j.at("pair_id").get<std::string>();
      const auto kind = ParsePairKind(j.at("kind").get<std::string>());
      if (!kind) Fail(ErrorKind::kValidation, "unknown pair kind");
      e.kind = *kind;
      e.score = j.at("score").get<double>();
      e.left = SideFromJson(j.at("left"));
      e.right = SideFromJson(j.at("right"));
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      Fail(ErrorKind::kValidation, path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

double PercentYield(double output_duration_s, double input_duration_s) {
  if (!(input_duration_s > 0.0)) Fail(ErrorKind::kValidation, "input duration must be positive");
  return 100.0 * output_duration_s / input_duration_s;
}

double RoundPercent(double percent) { return std::round(percent * 10.0) / 10.0; }

// The published figures drop the fraction (17.6/36 prints as 48, not 49).
int TruncatedPercent(double percent) { return static_cast<int>(std::floor(percent + 1e-9)); }

CorpusStats ComputeStats(const MatchOutcome& outcome, const std::vector<SpeechSegment>& left,
                         const std::vector<SpeechSegment>& right,
                         const std::vector<TrackInventory>& inputs, const PipelineConfig& cfg) {
  if (inputs.empty()) Fail(ErrorKind::kValidation, "no input inventory");
  const auto lidx = IndexById(left);
  const auto ridx = IndexById(right);
  CorpusStats s;
  s.inputs = inputs;
  s.max_start_diff_s = cfg.max_start_diff_s;
  s.max_dur_diff_s = cfg.max_dur_diff_s;
  std::size_t left_count = 0, right_count = 0;
  Millis doubled_output_ms = 0;
  double score_sum = 0.0;
  for (const auto& p : outcome.pairs) {
    left_count += p.left.size();
    right_count += p.right.size();
    doubled_output_ms += SideDuration(p.left, left, lidx) + SideDuration(p.right, right, ridx);
    score_sum += p.score;
  }
  const TrackId left_track = left.empty() ? TrackId() : left.front().track;
  for (const auto& inv : inputs) {
    s.output_segments.push_back(inv.track == left_track ? left_count : right_count);
  }
  s.output_duration_s = static_cast<double>(doubled_output_ms) / 2000.0;
  s.avg_similarity = outcome.pairs.empty() ? 0.0 : score_sum / static_cast<double>(outcome.pairs.size());
  s.percent_yield = PercentYield(s.output_duration_s, inputs.front().input_duration_s);
  return s;
}

std::string FormatDuration(double seconds) {
  char buf[64];
  if (seconds >= 3600.0) {
    const double hours = std::round(seconds / 360.0) / 10.0;
    if (hours == std::floor(hours)) {
      std::snprintf(buf, sizeof(buf), "%.0f hrs", hours);
    } else {
      std::snprintf(buf, sizeof(buf), "%.1f hrs", hours);
    }
  } else if (seconds >= 60.0) {
    std::snprintf(buf, sizeof(buf), "%.0f mins", std::round(seconds / 60.0));
  } else {
    std::snprintf(buf, sizeof(buf), "%.0f secs", std::round(seconds));
  }
  return buf;
}

std::vector<std::string> StatsHeader() {
  return {"Lang.",         "Input Duration",  "Input Segments",  "Dif Start Time", "Dif Dur",
          "Output Segments", "Output Duration", "Avg Similarity", "Percent"};
}

std::vector<std::string> StatsRow(const CorpusStats& s) {
  std::string lang, in_segs, out_segs;
  for (std::size_t k = 0; k < s.inputs.size(); ++k) {
    std::string code = s.inputs[k].language;
    for (auto& c : code) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    lang += (k ? "-" : "") + code;
    in_segs += (k ? ";" : "") + std::to_string(s.inputs[k].input_segments);
    out_segs += (k ? ";" : "") + std::to_string(s.output_segments.at(k));
  }
  char sim[32], pct[48];
  std::snprintf(sim, sizeof(sim), "%.2f", s.avg_similarity);
  std::snprintf(pct, sizeof(pct), "%.1f (%d)", RoundPercent(s.percent_yield),
                TruncatedPercent(s.percent_yield));
  return {lang,
          FormatDuration(s.inputs.front().input_duration_s),
          in_segs,
          "<=" + FormatDouble(s.max_start_diff_s),
          "<=" + FormatDouble(s.max_dur_diff_s),
          out_segs,
          FormatDuration(s.output_duration_s),
          sim,
          pct};
}

std::string StatsTable(const std::vector<CorpusStats>& rows) {
  if (rows.empty()) Fail(ErrorKind::kValidation, "no statistics rows to format");
  std::vector<std::vector<std::string>> cells{StatsHeader()};
  for (const auto& r : rows) cells.push_back(StatsRow(r));
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out += line + "\n";
  }
  out += "\nOutput duration counts each pair once, as the mean of its two sides.\n"
         "Percent = output duration / reference input duration; the integer in\n"
         "parentheses is the truncated value.\n";
  return out;
}

std::string StatsTsv(const std::vector<CorpusStats>& rows) {
  if (rows.empty()) Fail(ErrorKind::kValidation, "no statistics rows to format");
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "\t" : "") + row[c];
    out += "\n";
  };
  emit(StatsHeader());
  for (const auto& r : rows) emit(StatsRow(r));
  return out;
}

}  // namespace dubalign

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

#include "dubalign/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dubalign {
namespace {

std::string FormatSeconds(Millis ms) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", static_cast<long long>(ms / 1000),
                static_cast<long long>(ms % 1000));
  return buf;
}

double ParseSeconds(const std::string& field, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size() || !std::isfinite(v)) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorKind::kValidation, where + "unparsable time '" + field + "'");
  }
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  return out;
}

}  // namespace

VadReport ParseVad(const std::string& text, TrackId track, const std::string& origin,
                   std::optional<Millis> track_duration_ms) {
  VadReport report;
  report.track = std::move(track);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    const auto fields = SplitTabs(line);
    if (fields.size() != 3) Fail(ErrorKind::kValidation, where + "expected 'label\\tstart\\tstop'");
    if (report.segments.empty() && (fields[0] == "label" || fields[0] == "labels")) continue;
    const auto label = ParseLabel(fields[0]);
    if (!label) Fail(ErrorKind::kValidation, where + "unknown label '" + fields[0] + "'");
    const Millis start = SecondsToMillis(ParseSeconds(fields[1], where));
    const Millis stop = SecondsToMillis(ParseSeconds(fields[2], where));
    if (start < 0) Fail(ErrorKind::kValidation, where + "negative start time");
    if (stop <= start) {
      Fail(ErrorKind::kValidation, where + "inverted span (" + fields[1] + " >= " + fields[2] + ")");
    }
    if (!report.segments.empty() && start < report.segments.back().span.end_ms()) {
      Fail(ErrorKind::kValidation, where + "span overlaps or precedes the previous row");
    }
    if (track_duration_ms && stop > *track_duration_ms) {
      Fail(ErrorKind::kValidation, where + "span ends after the track (" +
                                       FormatSeconds(*track_duration_ms) + " s)");
    }
    report.segments.push_back({*label, TimeSpan(start, stop)});
  }
  return report;
}

VadReport IngestVad(const std::filesystem::path& path, TrackId track,
                    std::optional<Millis> track_duration_ms) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "VAD file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseVad(ss.str(), std::move(track), path.string(), track_duration_ms);
}

std::string SerializeVad(const VadReport& report) {
  std::string out;
  for (const auto& s : report.segments) {
    out += LabelName(s.label);
    out += '\t';
    out += FormatSeconds(s.span.start_ms());
    out += '\t';
    out += FormatSeconds(s.span.end_ms());
    out += '\n';
  }
  return out;
}

void WriteVad(const std::filesystem::path& path, const VadReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << SerializeVad(report);
}

VadReport EnergyVad(const AudioTrack& audio, const EnergyVadOptions& opt) {
  if (audio.samples.empty()) Fail(ErrorKind::kValidation, "energy VAD on empty audio");
  const Millis duration = audio.duration_ms();
  if (duration <= 0) Fail(ErrorKind::kValidation, "audio shorter than 1 ms");
  const std::size_t frame_len = static_cast<std::size_t>(opt.frame_ms) * kSamplesPerMs;
  const std::size_t hop_len = static_cast<std::size_t>(opt.hop_ms) * kSamplesPerMs;
  const std::size_t total = audio.samples.size();
  const std::size_t frames = (total + hop_len - 1) / hop_len;

  std::vector<double> db(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t lo = f * hop_len;
    const std::size_t hi = std::min(total, lo + frame_len);
    double energy = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double x = audio.samples[i] / 32768.0;
      energy += x * x;
    }
    db[f] = 10.0 * std::log10(energy / static_cast<double>(hi - lo) + 1e-20);
  }
  const double loudest = *std::max_element(db.begin(), db.end());

  // Active runs of frames, converted to time at the midpoint of each edge's
  // uncertainty interval: an onset lies between the end of the last silent
  // frame and the end of the first active one, an offset between the start of
  // the last active frame and the start of the next.
  std::vector<std::pair<Millis, Millis>> active;
  for (std::size_t f = 0; f < frames;) {
    const bool on = db[f] > opt.floor_dbfs && db[f] >= loudest + opt.threshold_db;
    if (!on) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g + 1 < frames && db[g + 1] > opt.floor_dbfs && db[g + 1] >= loudest + opt.threshold_db) ++g;
    Millis start = f == 0 ? 0 : static_cast<Millis>(f) * opt.hop_ms + opt.frame_ms - opt.hop_ms / 2;
    Millis end = g + 1 == frames ? duration : static_cast<Millis>(g) * opt.hop_ms + opt.hop_ms / 2;
    start = std::clamp<Millis>(start, 0, duration);
    end = std::clamp<Millis>(end, 0, duration);
    if (end <= start) {
      start = static_cast<Millis>(f) * opt.hop_ms;
      end = std::min<Millis>(duration, static_cast<Millis>(g) * opt.hop_ms + opt.frame_ms);
    }
    if (end > start) active.emplace_back(start, end);
    f = g + 1;
  }

  std::vector<std::pair<Millis, Millis>> merged;
  for (const auto& a : active) {
    if (!merged.empty() && a.first - merged.back().second <= opt.merge_gap_ms) {
      merged.back().second = std::max(merged.back().second, a.second);
    } else {
      merged.push_back(a);
    }
  }
  std::erase_if(merged, [&](const auto& a) { return a.second - a.first < opt.min_segment_ms; });

  VadReport report;
  report.track = audio.track;
  report.degraded_labels = true;
  Millis cursor = 0;
  for (const auto& [s, e] : merged) {
    if (s > cursor) report.segments.push_back({SegmentLabel::kNoEnergy, TimeSpan(cursor, s)});
    report.segments.push_back({SegmentLabel::kMale, TimeSpan(s, e)});
    cursor = e;
  }
  if (cursor < duration) report.segments.push_back({SegmentLabel::kNoEnergy, TimeSpan(cursor, duration)});
  return report;
}

std::map<std::string, LabelCounts> LabelHistogram(const std::vector<VadReport>& reports) {
  std::map<std::string, LabelCounts> out;
  for (const auto& r : reports) {
    auto& counts = out[r.track.str()];
    for (const auto& s : r.segments) ++counts[static_cast<std::size_t>(s.label)];
  }
  return out;
}

std::string FormatHistogram(const std::map<std::string, LabelCounts>& histogram) {
  std::string out = "track";
  for (SegmentLabel l : kAllLabels) {
    out += '\t';
    out += LabelName(l);
  }
  out += '\n';
  for (const auto& [track, counts] : histogram) {
    out += track;
    for (std::size_t c : counts) out += '\t' + std::to_string(c);
    out += '\n';
  }
  return out;
}

std::string SegmentIdFor(const TrackId& track, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu", ordinal);
  return track.str() + "-" + buf;
}

std::vector<SpeechSegment> SliceSpeechSegments(const VadReport& report,
                                               const std::string& language) {
  std::vector<SpeechSegment> out;
  for (const auto& s : report.segments) {
    if (!IsMatchable(s.label)) continue;
    SpeechSegment seg;
    seg.id = SegmentIdFor(report.track, out.size() + 1);
    seg.track = report.track;
    seg.span = s.span;
    seg.label = s.label;
    seg.language = language;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace dubalign

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

#include "dubalign/segment_io.hpp"

#include <fstream>
#include <sstream>

namespace dubalign {

using nlohmann::json;

json SegmentToJson(const SpeechSegment& s) {
  json j;
  j["id"] = s.id;
  j["track"] = s.track.str();
  j["start_ms"] = s.span.start_ms();
  j["end_ms"] = s.span.end_ms();
  j["label"] = std::string(LabelName(s.label));
  j["language"] = s.language;
  j["transcript"] = s.transcript ? json(*s.transcript) : json(nullptr);
  j["translation"] = s.translation ? json(*s.translation) : json(nullptr);
  return j;
}

SpeechSegment SegmentFromJson(const json& j) {
  SpeechSegment s;
  try {
    s.id = j.at("id").get<std::string>();
    s.track = TrackId(j.at("track").get<std::string>());
    s.span = TimeSpan(j.at("start_ms").get<Millis>(), j.at("end_ms").get<Millis>());
    const auto label = ParseLabel(j.at("label").get<std::string>());
    if (!label) Fail(ErrorKind::kValidation, "unknown label in segment " + s.id);
    s.label = *label;
    s.language = j.value("language", "");
    if (j.contains("transcript") && !j["transcript"].is_null()) {
      s.transcript = j["transcript"].get<std::string>();
    }
    if (j.contains("translation") && !j["translation"].is_null()) {
      s.translation = j["translation"].get<std::string>();
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kValidation, std::string("malformed segment record: ") + e.what());
  }
  return s;
}

void WriteSegments(const std::filesystem::path& path, const std::vector<SpeechSegment>& segments) {
  std::string out;
  for (const auto& s : segments) out += SegmentToJson(s).dump() + "\n";
  WriteFileAtomic(path, out);
}

std::vector<SpeechSegment> ReadSegments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "segment file not found: " + path.string());
  std::vector<SpeechSegment> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(SegmentFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kValidation, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out << contents;
    if (!out) Fail(ErrorKind::kIo, "short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kMissingArtifact, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream OpenAppendLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool torn = false;
  {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) {
      in.seekg(-1, std::ios::end);
      torn = in.get() != '\n';
    }
  }
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot open " + path.string() + " for appending");
  if (torn) out << '\n';
  return out;
}

}  // namespace dubalign

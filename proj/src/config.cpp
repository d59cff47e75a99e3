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

#include "dubalign/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "dubalign/hash.hpp"

namespace dubalign {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ParseDouble(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    Fail(ErrorKind::kValidation, "config key '" + key + "': not a number: '" + v + "'");
  }
  return out;
}

int ParseInt(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    Fail(ErrorKind::kValidation, "config key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  Fail(ErrorKind::kValidation, "config key '" + key + "': not a boolean: '" + v + "'");
}

struct Field {
  const char* key;  // canonical dotted key
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      {"frames.fps", [](auto& c, auto& k, auto& v) { c.fps = ParseInt(k, v); },
       [](auto& c) { return std::to_string(c.fps); }},
      {"frames.ssim_threshold",
       [](auto& c, auto& k, auto& v) { c.ssim_threshold = ParseDouble(k, v); },
       [](auto& c) { return FormatDouble(c.ssim_threshold); }},
      {"frames.search_window_frames",
       [](auto& c, auto& k, auto& v) { c.search_window_frames = ParseInt(k, v); },
       [](auto& c) { return std::to_string(c.search_window_frames); }},
      {"frames.drift_compensation",
       [](auto& c, auto& k, auto& v) { c.drift_compensation = ParseBool(k, v); },
       [](auto& c) { return std::string(c.drift_compensation ? "true" : "false"); }},
      {"frames.stride", [](auto& c, auto& k, auto& v) { c.frame_stride = ParseInt(k, v); },
       [](auto& c) { return std::to_string(c.frame_stride); }},
      {"vad.energy_threshold_db",
       [](auto& c, auto& k, auto& v) { c.energy_threshold_db = ParseDouble(k, v); },
       [](auto& c) { return FormatDouble(c.energy_threshold_db); }},
      {"match.max_start_diff_s",
       [](auto& c, auto& k, auto& v) { c.max_start_diff_s = ParseDouble(k, v); },
       [](auto& c) { return FormatDouble(c.max_start_diff_s); }},
      {"match.max_dur_diff_s",
       [](auto& c, auto& k, auto& v) { c.max_dur_diff_s = ParseDouble(k, v); },
       [](auto& c) { return FormatDouble(c.max_dur_diff_s); }},
      {"match.min_similarity",
       [](auto& c, auto& k, auto& v) { c.min_similarity = ParseDouble(k, v); },
       [](auto& c) { return FormatDouble(c.min_similarity); }},
      {"match.max_window_segments",
       [](auto& c, auto& k, auto& v) { c.max_window_segments = ParseInt(k, v); },
       [](auto& c) { return std::to_string(c.max_window_segments); }},
  };
  return fields;
}

const Field* FindField(const std::string& key) {
  for (const auto& f : Fields()) {
    const std::string canonical = f.key;
    if (key == canonical) return &f;
    if (key == canonical.substr(canonical.find('.') + 1)) return &f;
  }
  return nullptr;
}

bool IsOwnedSection(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) return true;
  const std::string section = key.substr(0, dot);
  return section == "frames" || section == "vad" || section == "match";
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

ConfigFile ConfigFile::Parse(const std::string& text, const std::string& origin) {
  ConfigFile out;
  out.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorKind::kValidation,
           origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
      Fail(ErrorKind::kValidation, origin + ":" + std::to_string(line_no) + ": malformed key");
    }
    out.entries_[key] = value;
  }
  return out;
}

ConfigFile ConfigFile::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "config file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path.string());
}

const std::string* ConfigFile::Find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

PipelineConfig ApplyConfig(const ConfigFile& file, PipelineConfig base) {
  for (const auto& [key, value] : file.entries()) {
    if (!IsOwnedSection(key)) continue;
    const Field* f = FindField(key);
    if (f == nullptr) Fail(ErrorKind::kValidation, "unknown config key '" + key + "'");
    f->set(base, key, value);
  }
  ValidateConfig(base);
  return base;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  return ApplyConfig(ConfigFile::Load(path));
}

void ValidateConfig(const PipelineConfig& c) {
  auto bad = [](const char* key, const std::string& why) {
    Fail(ErrorKind::kValidation, std::string("config key '") + key + "' out of range: " + why);
  };
  if (c.fps <= 0 || c.fps > 1000) bad("frames.fps", "must be in (0, 1000]");
  if (!(c.ssim_threshold >= 0.0 && c.ssim_threshold <= 1.0)) bad("frames.ssim_threshold", "must be in [0, 1]");
  if (c.search_window_frames < 1) bad("frames.search_window_frames", "must be >= 1");
  if (c.frame_stride < 1) bad("frames.stride", "must be >= 1");
  if (!(c.energy_threshold_db < 0.0)) bad("vad.energy_threshold_db", "must be negative");
  if (!(c.max_start_diff_s >= 0.0)) bad("match.max_start_diff_s", "must be >= 0");
  if (!(c.max_dur_diff_s >= 0.0)) bad("match.max_dur_diff_s", "must be >= 0");
  if (!(c.min_similarity >= 0.0 && c.min_similarity <= 1.0)) bad("match.min_similarity", "must be in [0, 1]");
  if (c.max_window_segments < 1) bad("match.max_window_segments", "must be >= 1");
}

std::string SerializeConfig(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& f : Fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::string ConfigHash(const PipelineConfig& cfg) { return HashHex(SerializeConfig(cfg)); }

}  // namespace dubalign

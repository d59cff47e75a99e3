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

#include "dubalign/text_pipeline.hpp"

#include <atomic>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "dubalign/hash.hpp"
#include "dubalign/parallel.hpp"
#include "dubalign/segment_io.hpp"

namespace dubalign {

using nlohmann::json;

namespace {

std::string SpanKey(const TrackId& track, Millis start, Millis end) {
  return track.str() + "|" + std::to_string(start) + "|" + std::to_string(end);
}

template <typename Fn>
void ForEachJsonLine(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "provider table not found: " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kValidation, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

httplib::Headers AuthHeaders() {
  httplib::Headers headers;
  if (const char* token = std::getenv(kProviderTokenEnv); token != nullptr && *token != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  return headers;
}

json PostJson(const std::string& base_url, const std::string& path, const std::string& body,
              const std::string& content_type) {
  httplib::Client client(base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  auto res = client.Post(path, AuthHeaders(), body, content_type);
  if (!res) {
    Fail(ErrorKind::kTransport, "provider request to " + base_url + path + " failed: " +
                                    httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    Fail(ErrorKind::kTransport,
         "provider " + base_url + path + " answered HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kTransport, "provider " + base_url + path + " sent malformed JSON: " + e.what());
  }
}

}  // namespace

FileAsrProvider::FileAsrProvider(const std::filesystem::path& table)
    : id_("file-asr:" + HashFile(table)) {
  ForEachJsonLine(table, [&](const json& j) {
    const TrackId track(j.at("track").get<std::string>());
    const Millis start = j.at("start_ms").get<Millis>();
    const Millis end = j.at("end_ms").get<Millis>();
    const auto& text = j.at("text");
    entries_[SpanKey(track, start, end)] =
        text.is_null() ? std::nullopt : std::optional<std::string>(text.get<std::string>());
  });
}

std::optional<std::string> FileAsrProvider::Transcribe(const TrackId& track, const TimeSpan& span,
                                                       std::span<const std::int16_t>,
                                                       const std::string&) {
  auto it = entries_.find(SpanKey(track, span.start_ms(), span.end_ms()));
  return it == entries_.end() ? std::nullopt : it->second;
}

FileMtProvider::FileMtProvider(const std::filesystem::path& table)
    : id_("file-mt:" + HashFile(table)) {
  ForEachJsonLine(table, [&](const json& j) {
    entries_[j.at("source").get<std::string>()] = j.at("target").get<std::string>();
  });
}

std::string FileMtProvider::Translate(const std::string& text, const std::string& source_language,
                                      const std::string& target_language) {
  auto it = entries_.find(text);
  if (it == entries_.end()) {
    Fail(ErrorKind::kValidation, "translation table has no " + source_language + "->" +
                                     target_language + " entry for '" + text + "'");
  }
  return it->second;
}

HttpAsrProvider::HttpAsrProvider(std::string base_url) : base_url_(std::move(base_url)) {}

std::optional<std::string> HttpAsrProvider::Transcribe(const TrackId& track, const TimeSpan& span,
                                                       std::span<const std::int16_t> samples,
                                                       const std::string& language) {
  const auto wav = EncodeWav(samples);
  httplib::Params params{{"track", track.str()},
                         {"start_ms", std::to_string(span.start_ms())},
                         {"end_ms", std::to_string(span.end_ms())},
                         {"language", language}};
  const std::string path = httplib::append_query_params("/transcribe", params);
  const json reply =
      PostJson(base_url_, path, std::string(wav.begin(), wav.end()), "audio/wav");
  const auto it = reply.find("text");
  if (it == reply.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) Fail(ErrorKind::kTransport, "provider 'text' is not a string");
  return it->get<std::string>();
}

HttpMtProvider::HttpMtProvider(std::string base_url) : base_url_(std::move(base_url)) {}

std::string HttpMtProvider::Translate(const std::string& text, const std::string& source_language,
                                      const std::string& target_language) {
  const json body = {{"text", text}, {"source", source_language}, {"target", target_language}};
  const json reply = PostJson(base_url_, "/translate", body.dump(), "application/json");
  const auto it = reply.find("text");
  if (it == reply.end() || !it->is_string()) {
    Fail(ErrorKind::kTransport, "translation reply lacks a 'text' string");
  }
  return it->get<std::string>();
}

TranscriptStore::TranscriptStore(const std::filesystem::path& path) : path_(path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      // A crash mid-append can leave a torn last line; skip it.
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("key") || !j.contains("value")) continue;
      const auto& v = j["value"];
      entries_[j["key"].get<std::string>()] =
          v.is_null() ? std::nullopt : std::optional<std::string>(v.get<std::string>());
    }
  }
  log_ = OpenAppendLog(path);
}

std::optional<std::optional<std::string>> TranscriptStore::Get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranscriptStore::Put(const std::string& key, const std::optional<std::string>& value) {
  std::lock_guard lock(mu_);
  entries_[key] = value;
  if (log_.is_open()) {
    const json j = {{"key", key}, {"value", value ? json(*value) : json(nullptr)}};
    log_ << j.dump() << '\n';
    log_.flush();
  }
}

std::size_t TranscriptStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::string TranscriptStore::AsrKey(const std::string& provider_id, const TrackId& track,
                                    const TimeSpan& span, const std::string& language) {
  return "asr|" + provider_id + "|" + track.str() + "|" +
         HashHex(SpanKey(track, span.start_ms(), span.end_ms())) + "|" + language;
}

std::string TranscriptStore::MtKey(const std::string& provider_id, const std::string& text,
                                   const std::string& source_language,
                                   const std::string& target_language) {
  return "mt|" + provider_id + "|" + source_language + ">" + target_language + "|" + HashHex(text);
}

std::vector<SpeechSegment> TranscribeAll(const std::vector<SpeechSegment>& segments,
                                         const AudioTrack& audio, AsrProvider& provider,
                                         TranscriptStore& store, int jobs, ProviderStats* stats) {
  for (const auto& s : segments) {
    if (s.track != audio.track) {
      Fail(ErrorKind::kValidation, "segment " + s.id + " does not belong to track " + audio.track.str());
    }
  }
  std::vector<SpeechSegment> out = segments;
  std::atomic<std::size_t> calls{0}, hits{0};
  const std::string pid = provider.id();
  ParallelFor(out.size(), jobs, [&](std::size_t i) {
    auto& seg = out[i];
    const std::string key = TranscriptStore::AsrKey(pid, seg.track, seg.span, seg.language);
    if (auto cached = store.Get(key)) {
      ++hits;
      seg.transcript = *cached;
      return;
    }
    ++calls;
    seg.transcript = provider.Transcribe(seg.track, seg.span, audio.Slice(seg.span), seg.language);
    store.Put(key, seg.transcript);
  });
  if (stats != nullptr) {
    stats->calls += calls;
    stats->cache_hits += hits;
  }
  return out;
}

DropResult DropUnrecognized(const std::vector<SpeechSegment>& segments) {
  DropResult r;
  for (const auto& s : segments) {
    if (s.recognized()) {
      r.kept.push_back(s);
    } else {
      ++r.removed;
    }
  }
  return r;
}

std::vector<SpeechSegment> TranslateAll(const std::vector<SpeechSegment>& segments,
                                        MtProvider& provider, const std::string& target_language,
                                        TranscriptStore& store, int jobs, ProviderStats* stats) {
  for (const auto& s : segments) {
    if (!s.recognized()) {
      Fail(ErrorKind::kValidation, "segment " + s.id + " has no transcript to translate");
    }
  }
  std::vector<SpeechSegment> out = segments;
  std::atomic<std::size_t> calls{0}, hits{0};
  const std::string pid = provider.id();
  ParallelFor(out.size(), jobs, [&](std::size_t i) {
    auto& seg = out[i];
    if (seg.transcript->empty()) {
      seg.translation = std::string();
      return;
    }
    const std::string key = TranscriptStore::MtKey(pid, *seg.transcript, seg.language, target_language);
    if (auto cached = store.Get(key); cached && *cached) {
      ++hits;
      seg.translation = **cached;
      return;
    }
    ++calls;
    seg.translation = provider.Translate(*seg.transcript, seg.language, target_language);
    store.Put(key, seg.translation);
  });
  if (stats != nullptr) {
    stats->calls += calls;
    stats->cache_hits += hits;
  }
  return out;
}

}  // namespace dubalign

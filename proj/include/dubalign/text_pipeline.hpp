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
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dubalign/audio.hpp"
#include "dubalign/core.hpp"

namespace dubalign {

// Speech recognition backend. Returns nullopt when the audio could not be
// recognized; throws Error(kTransport) when the backend itself failed.
class AsrProvider {
 public:
  virtual ~AsrProvider() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::string> languages() const { return {}; }  // empty: any
  virtual std::optional<std::string> Transcribe(const TrackId& track, const TimeSpan& span,
                                                std::span<const std::int16_t> samples,
                                                const std::string& language) = 0;
};

// Text translation backend. Throws Error(kTransport) on backend failure.
class MtProvider {
 public:
  virtual ~MtProvider() = default;
  virtual std::string id() const = 0;
  virtual std::string Translate(const std::string& text, const std::string& source_language,
                                const std::string& target_language) = 0;
};

// Offline recognizer backed by a JSON-lines table:
//   {"track": "D1", "start_ms": 1000, "end_ms": 3200, "text": "..." | null}
// Spans absent from the table, or mapped to null, are unrecognized.
class FileAsrProvider final : public AsrProvider {
 public:
  explicit FileAsrProvider(const std::filesystem::path& table);
  std::string id() const override { return id_; }
  std::optional<std::string> Transcribe(const TrackId& track, const TimeSpan& span,
                                        std::span<const std::int16_t> samples,
                                        const std::string& language) override;

 private:
  std::string id_;
  std::map<std::string, std::optional<std::string>> entries_;
};

// Offline translator backed by a JSON-lines table: {"source": "...", "target": "..."}.
// Text missing from the table is a validation error.
class FileMtProvider final : public MtProvider {
 public:
  explicit FileMtProvider(const std::filesystem::path& table);
  std::string id() const override { return id_; }
  std::string Translate(const std::string& text, const std::string& source_language,
                        const std::string& target_language) override;

 private:
  std::string id_;
  std::unordered_map<std::string, std::string> entries_;
};

class EchoMtProvider final : public MtProvider {
 public:
  std::string id() const override { return "echo"; }
  std::string Translate(const std::string& text, const std::string&, const std::string&) override {
    return text;
  }
};

inline constexpr const char* kProviderTokenEnv = "DUBALIGN_PROVIDER_TOKEN";

// Live providers speaking a small JSON-over-HTTP protocol:
//   POST <base>/transcribe?track=&start_ms=&end_ms=&language=   body: WAV
//        -> {"text": "..." | null}
//   POST <base>/translate   body: {"text", "source", "target"} -> {"text": "..."}
// A bearer token is sent when DUBALIGN_PROVIDER_TOKEN is set.
class HttpAsrProvider final : public AsrProvider {
 public:
  explicit HttpAsrProvider(std::string base_url);
  std::string id() const override { return "http:" + base_url_; }
  std::optional<std::string> Transcribe(const TrackId& track, const TimeSpan& span,
                                        std::span<const std::int16_t> samples,
                                        const std::string& language) override;

 private:
  std::string base_url_;
};

class HttpMtProvider final : public MtProvider {
 public:
  explicit HttpMtProvider(std::string base_url);
  std::string id() const override { return "http:" + base_url_; }
  std::string Translate(const std::string& text, const std::string& source_language,
                        const std::string& target_language) override;

 private:
  std::string base_url_;
};

// Persistent cache of provider results, one JSON object per line:
//   {"key": "...", "value": "..." | null}
// Later lines win. A hit never reaches the provider.
class TranscriptStore {
 public:
  TranscriptStore() = default;  // memory only
  explicit TranscriptStore(const std::filesystem::path& path);

  // Outer optional: cache hit. Inner optional: unrecognized marker.
  std::optional<std::optional<std::string>> Get(const std::string& key) const;
  void Put(const std::string& key, const std::optional<std::string>& value);
  std::size_t size() const;

  static std::string AsrKey(const std::string& provider_id, const TrackId& track,
                            const TimeSpan& span, const std::string& language);
  static std::string MtKey(const std::string& provider_id, const std::string& text,
                           const std::string& source_language, const std::string& target_language);

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::optional<std::string>> entries_;
  std::filesystem::path path_;
  std::ofstream log_;
};

struct ProviderStats {
  std::size_t calls = 0;
  std::size_t cache_hits = 0;
};

// Fills each segment's transcript (or leaves it unrecognized), preserving
// order. Results are cached as they arrive, so a transport failure keeps the
// progress made before it; the failure is then rethrown.
std::vector<SpeechSegment> TranscribeAll(const std::vector<SpeechSegment>& segments,
                                         const AudioTrack& audio, AsrProvider& provider,
                                         TranscriptStore& store, int jobs = 1,
                                         ProviderStats* stats = nullptr);

struct DropResult {
  std::vector<SpeechSegment> kept;
  std::size_t removed = 0;
};

DropResult DropUnrecognized(const std::vector<SpeechSegment>& segments);

// Fills `translation` for every segment. Empty transcripts translate to
// empty text without a provider call.
std::vector<SpeechSegment> TranslateAll(const std::vector<SpeechSegment>& segments,
                                        MtProvider& provider, const std::string& target_language,
                                        TranscriptStore& store, int jobs = 1,
                                        ProviderStats* stats = nullptr);

}  // namespace dubalign

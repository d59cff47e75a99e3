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

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dubalign/audio.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/text_pipeline.hpp"
#include "test_support.hpp"

using namespace dubalign;
using dubalign::testing::MakeSegment;
using dubalign::testing::TempDir;

namespace {

// Transcribes every span as "t<start>", failing from call `fail_at` on.
class CountingAsr final : public AsrProvider {
 public:
  explicit CountingAsr(int fail_at = -1) : fail_at_(fail_at) {}
  std::string id() const override { return "counting"; }
  std::optional<std::string> Transcribe(const TrackId&, const TimeSpan& span,
                                        std::span<const std::int16_t>, const std::string&) override {
    const int n = calls++;
    if (fail_at_ >= 0 && n >= fail_at_) Fail(ErrorKind::kTransport, "backend down");
    if (span.start_ms() == 3000) return std::nullopt;
    return "t" + std::to_string(span.start_ms());
  }
  std::atomic<int> calls{0};

 private:
  int fail_at_;
};

class UpperMt final : public MtProvider {
 public:
  std::string id() const override { return "upper"; }
  std::string Translate(const std::string& text, const std::string&, const std::string&) override {
    ++calls;
    std::string out = text;
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }
  std::atomic<int> calls{0};
};

std::vector<SpeechSegment> FourSegments() {
  std::vector<SpeechSegment> segs;
  for (int k = 0; k < 4; ++k) {
    auto s = MakeSegment("D1-000" + std::to_string(k + 1), "D1", k * 1000, k * 1000 + 800,
                         SegmentLabel::kMale, "");
    s.track = TrackId("D1");
    s.transcript.reset();
    s.translation.reset();
    segs.push_back(s);
  }
  return segs;
}

AudioTrack Silence(Millis ms) {
  AudioTrack a;
  a.track = TrackId("D1");
  a.samples.assign(static_cast<std::size_t>(ms * kSamplesPerMs), 0);
  return a;
}

}  // namespace

TEST_SUITE("text_pipeline") {

TEST_CASE("transcription preserves order and marks unrecognized spans") {
  CountingAsr asr;
  TranscriptStore store;
  ProviderStats stats;
  const auto out = TranscribeAll(FourSegments(), Silence(5000), asr, store, 3, &stats);
  REQUIRE(out.size() == 4);
  CHECK(out[0].transcript == "t0");
  CHECK(out[2].transcript == "t2000");
  CHECK_FALSE(out[3].recognized());
  CHECK(stats.calls == 4);
  const auto dropped = DropUnrecognized(out);
  CHECK(dropped.removed == 1);
  CHECK(dropped.kept.size() == 3);
}

TEST_CASE("cache hits never reach the provider and persist on disk") {
  TempDir dir("cache");
  {
    CountingAsr asr;
    TranscriptStore store(dir / "c/cache.jsonl");
    TranscribeAll(FourSegments(), Silence(5000), asr, store);
    CHECK(asr.calls == 4);
  }
  CountingAsr asr;
  TranscriptStore store(dir / "c/cache.jsonl");
  CHECK(store.size() == 4);
  ProviderStats stats;
  const auto out = TranscribeAll(FourSegments(), Silence(5000), asr, store, 2, &stats);
  CHECK(asr.calls == 0);
  CHECK(stats.cache_hits == 4);
  CHECK_FALSE(out[3].recognized());
}

TEST_CASE("a transport failure keeps the progress made before it") {
  TempDir dir("cache");
  {
    CountingAsr failing(2);
    TranscriptStore store(dir / "cache.jsonl");
    try {
      TranscribeAll(FourSegments(), Silence(5000), failing, store);
      FAIL("expected a throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kTransport);
    }
  }
  CountingAsr asr;
  TranscriptStore store(dir / "cache.jsonl");
  CHECK(store.size() == 2);
  TranscribeAll(FourSegments(), Silence(5000), asr, store);
  CHECK(asr.calls == 2);
}

TEST_CASE("torn cache lines are skipped") {
  TempDir dir("cache");
  WriteFileAtomic(dir / "c.jsonl", "{\"key\":\"a\",\"value\":\"x\"}\n{\"key\":\"b\",\"val");
  TranscriptStore store(dir / "c.jsonl");
  CHECK(store.size() == 1);
  CHECK(store.Get("a") == std::optional<std::optional<std::string>>(std::string("x")));
  CHECK_FALSE(store.Get("b"));
  store.Put("c", std::nullopt);
  TranscriptStore again(dir / "c.jsonl");
  CHECK(again.size() == 2);
  CHECK(again.Get("c") == std::optional<std::optional<std::string>>(std::optional<std::string>()));
}

TEST_CASE("cache keys separate providers, spans and languages") {
  const TimeSpan s(0, 1000);
  const TrackId t("D1");
  CHECK(TranscriptStore::AsrKey("a", t, s, "tr") != TranscriptStore::AsrKey("b", t, s, "tr"));
  CHECK(TranscriptStore::AsrKey("a", t, s, "tr") != TranscriptStore::AsrKey("a", t, s, "ar"));
  CHECK(TranscriptStore::AsrKey("a", t, s, "tr") != TranscriptStore::AsrKey("a", t, TimeSpan(0, 999), "tr"));
  CHECK(TranscriptStore::MtKey("m", "x", "tr", "ar") != TranscriptStore::MtKey("m", "x", "ar", "tr"));
}

TEST_CASE("translation fills every segment and skips empty text") {
  auto segs = FourSegments();
  segs[0].transcript = "merhaba";
  segs[1].transcript = "";
  segs[2].transcript = "merhaba";
  segs[3].transcript = "dunya";
  UpperMt mt;
  TranscriptStore store;
  const auto out = TranslateAll(segs, mt, "ar", store, 2);
  CHECK(out[0].translation == "MERHABA");
  CHECK(out[1].translation == "");
  CHECK(out[3].translation == "DUNYA");
  CHECK(mt.calls <= 3);
  segs[1].transcript.reset();
  CHECK_THROWS_AS(TranslateAll(segs, mt, "ar", store), Error);
}

TEST_CASE("file providers read JSON-lines tables") {
  TempDir dir("tables");
  WriteFileAtomic(dir / "asr.jsonl",
                  "{\"track\":\"D1\",\"start_ms\":0,\"end_ms\":800,\"text\":\"bir\"}\n"
                  "{\"track\":\"D1\",\"start_ms\":1000,\"end_ms\":1800,\"text\":null}\n");
  FileAsrProvider asr(dir / "asr.jsonl");
  const std::vector<std::int16_t> none;
  CHECK(asr.Transcribe(TrackId("D1"), TimeSpan(0, 800), none, "tr") == "bir");
  CHECK_FALSE(asr.Transcribe(TrackId("D1"), TimeSpan(1000, 1800), none, "tr"));
  CHECK_FALSE(asr.Transcribe(TrackId("D2"), TimeSpan(0, 800), none, "tr"));

  WriteFileAtomic(dir / "mt.jsonl", "{\"source\":\"bir\",\"target\":\"one\"}\n");
  FileMtProvider mt(dir / "mt.jsonl");
  CHECK(mt.Translate("bir", "tr", "ar") == "one");
  CHECK_THROWS_AS(mt.Translate("iki", "tr", "ar"), Error);

  WriteFileAtomic(dir / "bad.jsonl", "{\"source\":1}\n");
  CHECK_THROWS_AS(FileMtProvider(dir / "bad.jsonl"), Error);
  try {
    FileAsrProvider missing(dir / "none.jsonl");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
}

TEST_CASE("http providers speak the JSON protocol") {
  httplib::Server server;
  std::string seen_auth, seen_query;
  std::size_t seen_bytes = 0;
  server.Post("/transcribe", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_query = req.get_param_value("start_ms") + "/" + req.get_param_value("language");
    seen_bytes = req.body.size();
    res.set_content(req.get_param_value("start_ms") == "0" ? R"({"text":"merhaba"})" : R"({"text":null})",
                    "application/json");
  });
  server.Post("/translate", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    res.set_content(nlohmann::json{{"text", body["text"].get<std::string>() + "@" +
                                                body["target"].get<std::string>()}}.dump(),
                    "application/json");
  });
  server.Post("/broken/translate", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  ::setenv(kProviderTokenEnv, "sekret", 1);
  HttpAsrProvider asr(base);
  const std::vector<std::int16_t> samples(1600, 0);
  CHECK(asr.Transcribe(TrackId("D1"), TimeSpan(0, 100), samples, "tr") == "merhaba");
  CHECK(seen_auth == "Bearer sekret");
  CHECK(seen_query == "0/tr");
  CHECK(seen_bytes == 44 + 2 * samples.size());
  CHECK_FALSE(asr.Transcribe(TrackId("D1"), TimeSpan(100, 200), samples, "tr"));
  ::unsetenv(kProviderTokenEnv);

  HttpMtProvider mt(base);
  CHECK(mt.Translate("selam", "tr", "ar") == "selam@ar");
  HttpMtProvider broken(base + "/broken");
  try {
    broken.Translate("x", "tr", "ar");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTransport);
  }
  server.stop();
  th.join();

  HttpMtProvider down(base);
  try {
    down.Translate("x", "tr", "ar");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kTransport);
  }
}

}  // TEST_SUITE

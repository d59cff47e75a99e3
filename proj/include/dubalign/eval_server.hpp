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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dubalign/corpus.hpp"
#include "dubalign/eval.hpp"

namespace httplib {
class Server;
}

namespace dubalign {

struct EvalServerOptions {
  std::filesystem::path corpus_dir;   // holds manifest.jsonl and audio/
  std::filesystem::path ratings;      // JSONL rating log
  std::optional<std::filesystem::path> sample;  // JSON list of pair ids to rate
  std::optional<std::filesystem::path> ui_dir;  // static bundle mounted at /
};

// Pair metadata as the review UI receives it.
nlohmann::json PairView(const PairManifestEntry& e, const std::string& annotator);

// Serves the rating API:
//   GET  /api/pairs/next?annotator=<id>
//   GET  /api/pairs/<id>/audio/<left|right>
//   POST /api/ratings   {"pair_id", "annotator", "score"}
//   GET  /api/report
class EvalServer {
 public:
  explicit EvalServer(EvalServerOptions opts);
  ~EvalServer();
  EvalServer(const EvalServer&) = delete;
  EvalServer& operator=(const EvalServer&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  int Start(const std::string& host, int port);
  // Blocks serving on the calling thread.
  void Listen(const std::string& host, int port);
  void Stop();

  const std::vector<std::string>& queue() const { return queue_; }
  nlohmann::json Report() const;

 private:
  void Routes();

  EvalServerOptions opts_;
  std::vector<PairManifestEntry> pairs_;
  std::map<std::string, std::size_t> by_id_;
  std::vector<std::string> queue_;
  std::map<std::string, std::string> labels_;
  std::unique_ptr<RatingStore> store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

std::vector<std::string> ReadSample(const std::filesystem::path& path);
void WriteSample(const std::filesystem::path& path, const std::vector<std::string>& ids,
                 std::uint64_t seed);

}  // namespace dubalign

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

#include "dubalign/eval_server.hpp"

#include <httplib.h>

#include "dubalign/segment_io.hpp"

namespace dubalign {

using nlohmann::json;

namespace {

json SideView(const PairManifestEntry& e, const PairSide& s, const char* side) {
  json transcripts = json::array(), translations = json::array();
  for (const auto& t : s.transcripts) transcripts.push_back(t ? json(*t) : json(nullptr));
  for (const auto& t : s.translations) translations.push_back(t ? json(*t) : json(nullptr));
  return {{"audio_url", "/api/pairs/" + e.pair_id + "/audio/" + side},
          {"track", s.track.str()},
          {"language", s.language},
          {"label", std::string(LabelName(s.label))},
          {"duration_ms", s.duration_ms},
          {"transcripts", transcripts},
          {"translations", translations}};
}

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& message) {
  SendJson(res, status, {{"error", message}});
}

}  // namespace

json PairView(const PairManifestEntry& e, const std::string& annotator) {
  return {{"pair_id", e.pair_id},
          {"kind", std::string(PairKindName(e.kind))},
          {"score", e.score},
          {"annotator", annotator},
          {"left", SideView(e, e.left, "left")},
          {"right", SideView(e, e.right, "right")}};
}

std::vector<std::string> ReadSample(const std::filesystem::path& path) {
  try {
    const json j = json::parse(ReadFile(path));
    return j.at("pairs").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kValidation, path.string() + ": " + e.what());
  }
}

void WriteSample(const std::filesystem::path& path, const std::vector<std::string>& ids,
                 std::uint64_t seed) {
  const json j = {{"seed", seed}, {"pairs", ids}};
  WriteFileAtomic(path, j.dump(2) + "\n");
}

EvalServer::EvalServer(EvalServerOptions opts) : opts_(std::move(opts)) {
  pairs_ = LoadManifest(opts_.corpus_dir / "manifest.jsonl");
  std::set<std::string> known;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    by_id_[pairs_[k].pair_id] = k;
    labels_[pairs_[k].pair_id] = std::string(LabelName(pairs_[k].left.label));
    known.insert(pairs_[k].pair_id);
  }
  if (opts_.sample) {
    queue_ = ReadSample(*opts_.sample);
    for (const auto& id : queue_) {
      if (!by_id_.count(id)) Fail(ErrorKind::kValidation, "sample names unknown pair " + id);
    }
  } else {
    for (const auto& p : pairs_) queue_.push_back(p.pair_id);
  }
  store_ = std::make_unique<RatingStore>(opts_.ratings, std::move(known));
  server_ = std::make_unique<httplib::Server>();
  Routes();
}

EvalServer::~EvalServer() { Stop(); }

json EvalServer::Report() const {
  return ReportToJson(BuildReport(store_->Ratings(), labels_));
}

void EvalServer::Routes() {
  server_->Get("/api/pairs/next", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string annotator = req.get_param_value("annotator");
    if (annotator.empty()) return SendError(res, 400, "annotator parameter is required");
    std::size_t rated = 0;
    const PairManifestEntry* next = nullptr;
    for (const auto& id : queue_) {
      if (store_->Find(id, annotator)) {
        ++rated;
      } else if (next == nullptr) {
        next = &pairs_[by_id_.at(id)];
      }
    }
    json body = {{"done", next == nullptr},
                 {"pair", next ? PairView(*next, annotator) : json(nullptr)},
                 {"progress", {{"rated", rated}, {"total", queue_.size()}}}};
    SendJson(res, 200, body);
  });

  server_->Get(R"(/api/pairs/([^/]+)/audio/(left|right))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 auto it = by_id_.find(req.matches[1].str());
                 if (it == by_id_.end()) return SendError(res, 404, "unknown pair");
                 const auto& e = pairs_[it->second];
                 const auto& side = req.matches[2].str() == "left" ? e.left : e.right;
                 try {
                   res.set_content(ReadFile(opts_.corpus_dir / side.audio), "audio/wav");
                 } catch (const Error& err) {
                   SendError(res, 404, err.what());
                 }
               });

  server_->Post("/api/ratings", [this](const httplib::Request& req, httplib::Response& res) {
    Rating r;
    try {
      const json j = json::parse(req.body);
      r.pair_id = j.at("pair_id").get<std::string>();
      r.annotator = j.at("annotator").get<std::string>();
      r.score = j.at("score").get<double>();
    } catch (const json::exception& e) {
      return SendError(res, 400, std::string("malformed rating: ") + e.what());
    }
    try {
      store_->Record(r);
    } catch (const Error& e) {
      return SendError(res, e.kind() == ErrorKind::kMissingArtifact ? 404 : 400, e.what());
    }
    SendJson(res, 200, {{"ok", true}, {"rated", store_->size()}});
  });

  server_->Get("/api/report", [this](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200, Report());
  });

  if (opts_.ui_dir) server_->set_mount_point("/", opts_.ui_dir->string());
}

int EvalServer::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) Fail(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void EvalServer::Listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    Fail(ErrorKind::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void EvalServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dubalign

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

#include "dubalign/pipeline.hpp"

#include <chrono>
#include <ostream>

#include "dubalign/audio.hpp"
#include "dubalign/corpus.hpp"
#include "dubalign/frame_align.hpp"
#include "dubalign/hash.hpp"
#include "dubalign/matcher.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/segmenter.hpp"
#include "dubalign/similarity.hpp"
#include "dubalign/text_pipeline.hpp"

namespace dubalign {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kLedgerVersion = 1;

std::string MaskPath(const TrackId& t) { return "frames/" + t.str() + ".mask.tsv"; }
std::string AudioPath(const TrackId& t) { return "audio/" + t.str() + ".wav"; }
std::string VadPath(const TrackId& t) { return "vad/" + t.str() + ".tsv"; }
std::string SlicedPath(const TrackId& t) { return "segments/" + t.str() + ".sliced.jsonl"; }
std::string TranscribedPath(const TrackId& t) { return "text/" + t.str() + ".transcribed.jsonl"; }
std::string TranslatedPath(const TrackId& t) { return "text/" + t.str() + ".translated.jsonl"; }
constexpr const char* kMatrixPath = "matrix/matrix.tsv";
constexpr const char* kOutcomePath = "match/outcome.jsonl";

std::optional<std::string> Get(const ConfigFile& f, const std::string& key) {
  if (const auto* v = f.Find(key)) return *v;
  return std::nullopt;
}

fs::path Resolve(const fs::path& base, const std::string& v) {
  fs::path p(v);
  return p.is_absolute() ? p : base / p;
}

TrackInput ResolveTrack(const ConfigFile& f, const fs::path& base, const std::string& prefix,
                        const std::string& default_id) {
  auto need = [&](const std::string& key) {
    auto v = Get(f, prefix + key);
    if (!v) Fail(ErrorKind::kUsage, "config is missing '" + prefix + key + "'");
    return *v;
  };
  TrackInput t;
  t.track = TrackId(Get(f, prefix + "track").value_or(default_id));
  t.frames = Resolve(base, need("frames"));
  t.audio = Resolve(base, need("audio"));
  if (auto v = Get(f, prefix + "vad")) t.vad = Resolve(base, *v);
  t.language = need("language");
  if (auto v = Get(f, prefix + "asr_table")) t.asr_table = Resolve(base, *v);
  t.asr_url = Get(f, prefix + "asr_url");
  return t;
}

void WriteWavAtomic(const fs::path& path, const AudioTrack& audio) {
  const auto bytes = EncodeWav(audio.samples);
  WriteFileAtomic(path, std::string(bytes.begin(), bytes.end()));
}

// Hash of a frame manifest together with every frame it lists.
std::string HashFrameSet(const fs::path& manifest_path) {
  const FrameManifest m = ReadFrameManifest(manifest_path, TrackId("hash"));
  Fnv1a h;
  h.Update(ReadFile(manifest_path));
  for (const auto& e : m.entries) h.Update(HashFile(m.Resolve(e)));
  return h.hex();
}

std::unique_ptr<AsrProvider> MakeAsr(const TrackInput& t) {
  if (t.asr_table) return std::make_unique<FileAsrProvider>(*t.asr_table);
  if (t.asr_url) return std::make_unique<HttpAsrProvider>(*t.asr_url);
  Fail(ErrorKind::kUsage, "no recognizer configured for track " + t.track.str() +
                              " (set its asr_table or asr_url)");
}

std::unique_ptr<MtProvider> MakeMt(const PipelineInputs& in) {
  if (in.mt_table) return std::make_unique<FileMtProvider>(*in.mt_table);
  if (in.mt_url) return std::make_unique<HttpMtProvider>(*in.mt_url);
  if (in.mt_echo) return std::make_unique<EchoMtProvider>();
  Fail(ErrorKind::kUsage, "no translator configured (set input.mt_table, input.mt_url or text.mt = echo)");
}

// Only the knobs a stage reads take part in its fingerprint; upstream
// changes arrive through the hashes of its input artifacts.
std::string StageKnobs(Stage stage, const PipelineConfig& c) {
  const std::string fd = FormatDouble(c.max_start_diff_s) + "|" + FormatDouble(c.max_dur_diff_s);
  switch (stage) {
    case Stage::kFrames:
      return std::to_string(c.fps) + "|" + FormatDouble(c.ssim_threshold) + "|" +
             std::to_string(c.search_window_frames) + "|" + (c.drift_compensation ? "drift" : "strict") +
             "|" + std::to_string(c.frame_stride);
    case Stage::kVad: return FormatDouble(c.energy_threshold_db);
    case Stage::kSimilarity:
      return FormatDouble(c.max_start_diff_s) + "|" + std::to_string(c.max_window_segments);
    case Stage::kMatch:
      return fd + "|" + FormatDouble(c.min_similarity) + "|" + std::to_string(c.max_window_segments);
    case Stage::kStats: return fd;
    default: return "";
  }
}

}  // namespace

std::string_view StageName(Stage s) {
  switch (s) {
    case Stage::kFrames: return "frames";
    case Stage::kVad: return "vad";
    case Stage::kTranscribe: return "transcribe";
    case Stage::kTranslate: return "translate";
    case Stage::kSimilarity: return "similarity";
    case Stage::kMatch: return "match";
    case Stage::kExport: return "export";
    case Stage::kStats: return "stats";
  }
  return "?";
}

std::optional<Stage> ParseStage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  return std::nullopt;
}

PipelineInputs ResolveInputs(const ConfigFile& file, const fs::path& base_dir) {
  PipelineInputs in;
  in.d1 = ResolveTrack(file, base_dir, "input.d1.", "D1");
  in.d2 = ResolveTrack(file, base_dir, "input.d2.", "D2");
  if (in.d1.track == in.d2.track) Fail(ErrorKind::kValidation, "the two tracks need distinct ids");
  if (auto v = Get(file, "input.mt_table")) in.mt_table = Resolve(base_dir, *v);
  in.mt_url = Get(file, "input.mt_url");
  in.mt_echo = Get(file, "text.mt").value_or("") == "echo";
  auto emb = Get(file, "input.embeddings");
  if (!emb) Fail(ErrorKind::kUsage, "config is missing 'input.embeddings'");
  in.embeddings = Resolve(base_dir, *emb);
  in.translate_track = Get(file, "text.translate_track").value_or(in.d1.track.str());
  if (in.translate_track != in.d1.track.str() && in.translate_track != in.d2.track.str()) {
    Fail(ErrorKind::kValidation, "text.translate_track names no configured track");
  }
  return in;
}

Pipeline::Pipeline(PipelineOptions opts, std::ostream& log) : opts_(std::move(opts)), log_(log) {
  ValidateConfig(opts_.cfg);
  LoadLedger();
}

const PipelineInputs& Pipeline::Inputs() {
  if (!inputs_) inputs_ = ResolveInputs(opts_.file, opts_.config_dir);
  return *inputs_;
}

void Pipeline::LoadLedger() {
  const auto path = Artifact("ledger.json");
  ledger_ = {{"version", kLedgerVersion}, {"stages", json::object()}};
  if (!fs::exists(path)) return;
  const json j = json::parse(ReadFile(path), nullptr, false);
  if (j.is_discarded() || j.value("version", 0) != kLedgerVersion) {
    log_ << "warning: ignoring unreadable ledger " << path.string() << "\n";
    return;
  }
  ledger_ = j;
  const std::string now = ConfigHash(opts_.cfg);
  const std::string before = j.value("config_hash", "");
  if (!before.empty() && before != now) {
    log_ << "warning: configuration hash changed since the last run (" << before << " -> " << now
         << "); affected stages will rerun\n";
  }
}

void Pipeline::SaveLedger() {
  ledger_["config_hash"] = ConfigHash(opts_.cfg);
  WriteFileAtomic(Artifact("ledger.json"), ledger_.dump(2) + "\n");
}

std::vector<std::pair<fs::path, std::string>> Pipeline::StageInputs(Stage stage) {
  const auto& in = Inputs();
  const TrackInput* tracks[2] = {&in.d1, &in.d2};
  const TrackId left(in.translate_track);
  const TrackId right = left == in.d1.track ? in.d2.track : in.d1.track;
  std::vector<std::pair<fs::path, std::string>> out;
  auto produced = [&](const std::string& rel, Stage by) {
    out.emplace_back(Artifact(rel), std::string(StageName(by)));
  };
  auto external = [&](const fs::path& p) { out.emplace_back(p, ""); };
  switch (stage) {
    case Stage::kFrames:
      for (const auto* t : tracks) {
        external(t->frames);
        external(t->audio);
      }
      break;
    case Stage::kVad:
      for (const auto* t : tracks) {
        produced(AudioPath(t->track), Stage::kFrames);
        if (t->vad) external(*t->vad);
      }
      break;
    case Stage::kTranscribe:
      for (const auto* t : tracks) {
        produced(SlicedPath(t->track), Stage::kVad);
        produced(AudioPath(t->track), Stage::kFrames);
        if (t->asr_table) external(*t->asr_table);
      }
      break;
    case Stage::kTranslate:
      produced(TranscribedPath(left), Stage::kTranscribe);
      if (in.mt_table) external(*in.mt_table);
      break;
    case Stage::kSimilarity:
      produced(TranslatedPath(left), Stage::kTranslate);
      produced(TranscribedPath(right), Stage::kTranscribe);
      external(in.embeddings);
      break;
    case Stage::kMatch:
      produced(TranslatedPath(left), Stage::kTranslate);
      produced(TranscribedPath(right), Stage::kTranscribe);
      produced(kMatrixPath, Stage::kSimilarity);
      external(in.embeddings);
      break;
    case Stage::kExport:
    case Stage::kStats:
      produced(kOutcomePath, Stage::kMatch);
      produced(TranslatedPath(left), Stage::kTranslate);
      produced(TranscribedPath(right), Stage::kTranscribe);
      for (const auto* t : tracks) produced(AudioPath(t->track), Stage::kFrames);
      if (stage == Stage::kStats) {
        for (const auto* t : tracks) produced(SlicedPath(t->track), Stage::kVad);
      }
      break;
  }
  return out;
}

std::string Pipeline::Fingerprint(Stage stage) {
  const auto& in = Inputs();
  Fnv1a h;
  // Fields end in a newline so adjacent values cannot run together.
  auto field = [&h](const std::string& v) {
    h.Update(v);
    h.Update("\n");
  };
  field(std::string(StageName(stage)));
  field(StageKnobs(stage, opts_.cfg));
  for (const auto* t : {&in.d1, &in.d2}) {
    field(t->track.str() + "|" + t->language + "|" + t->asr_url.value_or(""));
  }
  field(in.translate_track + "|" + in.mt_url.value_or("") + (in.mt_echo ? "|echo" : ""));
  for (const auto& [path, producer] : StageInputs(stage)) {
    // External inputs count by content alone, so moving a corpus does not
    // invalidate a run; internal ones by their place in the output tree.
    field(producer.empty() ? "external" : fs::relative(path, opts_.out_dir).generic_string());
    const bool manifest = stage == Stage::kFrames && (path == in.d1.frames || path == in.d2.frames);
    field(manifest ? HashFrameSet(path) : HashFile(path));
  }
  return h.hex();
}

StageReport Pipeline::RunStage(Stage stage) {
  const std::string name(StageName(stage));
  for (const auto& [path, producer] : StageInputs(stage)) {
    if (fs::exists(path)) continue;
    if (producer.empty()) Fail(ErrorKind::kMissingArtifact, "input not found: " + path.string());
    Fail(ErrorKind::kMissingArtifact, "missing " + path.string() + "; run `dubalign " + producer +
                                          "` first");
  }
  const std::string fingerprint = Fingerprint(stage);
  StageReport report{stage, false, 0.0, {}};
  auto& entry = ledger_["stages"][name];
  if (!opts_.force && entry.is_object() && entry.value("fingerprint", "") == fingerprint) {
    bool intact = true;
    for (const auto& [rel, hash] : entry.at("outputs").items()) {
      const auto p = Artifact(rel);
      if (!fs::exists(p) || HashFile(p) != hash.get<std::string>()) {
        intact = false;
        break;
      }
    }
    if (intact) {
      log_ << "[" << name << "] up to date\n";
      report.skipped = true;
      return report;
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  report.outputs = Execute(stage);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json outputs = json::object();
  for (const auto& p : report.outputs) {
    outputs[fs::relative(p, opts_.out_dir).generic_string()] = HashFile(p);
  }
  entry = {{"fingerprint", fingerprint},
           {"config_hash", ConfigHash(opts_.cfg)},
           {"status", "done"},
           {"seconds", report.seconds},
           {"outputs", outputs}};
  SaveLedger();
  log_ << "[" << name << "] done in " << report.seconds << " s\n";
  return report;
}

std::vector<StageReport> Pipeline::RunAll() {
  std::vector<StageReport> out;
  for (Stage s : kAllStages) out.push_back(RunStage(s));
  return out;
}

std::vector<fs::path> Pipeline::Execute(Stage stage) {
  const auto& in = Inputs();
  const auto& cfg = opts_.cfg;
  const TrackInput* tracks[2] = {&in.d1, &in.d2};
  const TrackId left_id(in.translate_track);
  const TrackInput& left_in = left_id == in.d1.track ? in.d1 : in.d2;
  const TrackInput& right_in = left_id == in.d1.track ? in.d2 : in.d1;
  std::vector<fs::path> outputs;
  auto out = [&](const std::string& rel) {
    outputs.push_back(Artifact(rel));
    return outputs.back();
  };

  switch (stage) {
    case Stage::kFrames: {
      auto m1 = ReadFrameManifest(in.d1.frames, in.d1.track);
      auto m2 = ReadFrameManifest(in.d2.frames, in.d2.track);
      for (const auto* m : {&m1, &m2}) {
        if (m->fps != cfg.fps) {
          Fail(ErrorKind::kValidation, "frame manifest of " + m->track.str() + " is at " +
                                           std::to_string(m->fps) + " fps but frames.fps is " +
                                           std::to_string(cfg.fps));
        }
      }
      const ManifestFrameSource s1(std::move(m1)), s2(std::move(m2));
      const CleanResult r = CleanPair(s1, s2, cfg, opts_.jobs);
      json summary = json::object();
      for (int k = 0; k < 2; ++k) {
        const TrackInput& t = *tracks[k];
        const RemovalMask& mask = k == 0 ? r.first : r.second;
        WriteMask(out(MaskPath(t.track)), mask);
        const AudioTrack raw = ReadWav(t.audio, t.track);
        WriteWavAtomic(out(AudioPath(t.track)), CompactAudio(raw, mask, cfg.fps));
        summary[t.track.str()] = {{"frames", mask.keep.size()},
                                  {"kept", mask.kept_count()},
                                  {"removed", mask.removed_count()},
                                  {"duration_s", mask.compacted_duration_s(cfg.fps)}};
        log_ << "[frames] " << t.track.str() << ": removed " << mask.removed_count() << " of "
             << mask.keep.size() << " frames\n";
      }
      WriteFileAtomic(out("frames/summary.json"), summary.dump(2) + "\n");
      break;
    }
    case Stage::kVad: {
      std::vector<VadReport> reports;
      for (const auto* t : tracks) {
        const AudioTrack audio = ReadWav(Artifact(AudioPath(t->track)), t->track);
        VadReport rep;
        if (t->vad) {
          rep = IngestVad(*t->vad, t->track, audio.duration_ms());
        } else {
          EnergyVadOptions o;
          o.threshold_db = cfg.energy_threshold_db;
          rep = EnergyVad(audio, o);
          log_ << "[vad] " << t->track.str()
               << ": energy fallback, active spans carry a placeholder label\n";
        }
        WriteFileAtomic(out(VadPath(t->track)), SerializeVad(rep));
        WriteSegments(out(SlicedPath(t->track)), SliceSpeechSegments(rep, t->language));
        reports.push_back(std::move(rep));
      }
      WriteFileAtomic(out("vad/histogram.tsv"), FormatHistogram(LabelHistogram(reports)));
      break;
    }
    case Stage::kTranscribe: {
      TranscriptStore store(Artifact("cache/transcripts.jsonl"));
      json summary = json::object();
      ProviderStats stats;
      for (const auto* t : tracks) {
        auto asr = MakeAsr(*t);
        const AudioTrack audio = ReadWav(Artifact(AudioPath(t->track)), t->track);
        const auto sliced = ReadSegments(Artifact(SlicedPath(t->track)));
        const auto done = TranscribeAll(sliced, audio, *asr, store, opts_.jobs, &stats);
        const DropResult dropped = DropUnrecognized(done);
        WriteSegments(out(TranscribedPath(t->track)), dropped.kept);
        summary[t->track.str()] = {{"segments", sliced.size()},
                                   {"recognized", dropped.kept.size()},
                                   {"dropped", dropped.removed}};
      }
      log_ << "[transcribe] provider calls " << stats.calls << ", cache hits " << stats.cache_hits << "\n";
      WriteFileAtomic(out("text/transcribe.json"), summary.dump(2) + "\n");
      break;
    }
    case Stage::kTranslate: {
      TranscriptStore store(Artifact("cache/transcripts.jsonl"));
      auto mt = MakeMt(in);
      ProviderStats stats;
      const auto segs = ReadSegments(Artifact(TranscribedPath(left_in.track)));
      WriteSegments(out(TranslatedPath(left_in.track)),
                    TranslateAll(segs, *mt, right_in.language, store, opts_.jobs, &stats));
      log_ << "[translate] provider calls " << stats.calls << ", cache hits " << stats.cache_hits << "\n";
      break;
    }
    case Stage::kSimilarity: {
      const auto table = LoadEmbeddings(in.embeddings);
      for (const auto& w : table.warnings()) log_ << "[similarity] warning: " << w << "\n";
      const auto left = ReadSegments(Artifact(TranslatedPath(left_in.track)));
      const auto right = ReadSegments(Artifact(TranscribedPath(right_in.track)));
      WriteMatrixTsv(out(kMatrixPath), BuildMatrix(left, right, table, cfg, opts_.jobs));
      break;
    }
    case Stage::kMatch: {
      const auto table = LoadEmbeddings(in.embeddings);
      const auto left = ReadSegments(Artifact(TranslatedPath(left_in.track)));
      const auto right = ReadSegments(Artifact(TranscribedPath(right_in.track)));
      const auto matrix = ReadMatrixTsv(Artifact(kMatrixPath), left, right);
      const MatchOutcome outcome = RunMatching(left, right, matrix, table, cfg);
      const auto bad = VerifyOutcome(outcome, left, right, cfg);
      if (!bad.empty()) {
        Fail(ErrorKind::kValidation, std::to_string(bad.size()) + " emitted pairs fail re-verification");
      }
      WriteOutcome(out(kOutcomePath), outcome, left, right);
      log_ << "[match] " << outcome.pairs.size() << " pairs, " << outcome.unmatched_left.size()
           << " left and " << outcome.unmatched_right.size() << " right segments unmatched\n";
      break;
    }
    case Stage::kExport: {
      const auto left = ReadSegments(Artifact(TranslatedPath(left_in.track)));
      const auto right = ReadSegments(Artifact(TranscribedPath(right_in.track)));
      const auto outcome = ReadOutcome(Artifact(kOutcomePath), left, right);
      const AudioTrack la = ReadWav(Artifact(AudioPath(left_in.track)), left_in.track);
      const AudioTrack ra = ReadWav(Artifact(AudioPath(right_in.track)), right_in.track);
      const auto manifest = ExportPairs(outcome, left, right, la, ra, Artifact("corpus"), opts_.jobs);
      outputs.push_back(manifest);
      for (const auto& e : LoadManifest(manifest)) {
        outputs.push_back(Artifact("corpus") / e.left.audio);
        outputs.push_back(Artifact("corpus") / e.right.audio);
      }
      break;
    }
    case Stage::kStats: {
      const auto left = ReadSegments(Artifact(TranslatedPath(left_in.track)));
      const auto right = ReadSegments(Artifact(TranscribedPath(right_in.track)));
      const auto outcome = ReadOutcome(Artifact(kOutcomePath), left, right);
      std::vector<TrackInventory> inv;
      for (const auto* t : tracks) {
        const AudioTrack audio = ReadWav(Artifact(AudioPath(t->track)), t->track);
        inv.push_back({t->track, t->language, static_cast<double>(audio.samples.size()) / kSampleRate,
                       ReadSegments(Artifact(SlicedPath(t->track))).size()});
      }
      const CorpusStats stats = ComputeStats(outcome, left, right, inv, cfg);
      WriteFileAtomic(out("stats/stats.tsv"), StatsTsv({stats}));
      const std::string table = StatsTable({stats});
      WriteFileAtomic(out("stats/stats.txt"), table);
      log_ << table;
      break;
    }
  }
  return outputs;
}

}  // namespace dubalign

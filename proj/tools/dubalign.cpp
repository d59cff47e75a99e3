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

// Command-line entry point: one subcommand per pipeline stage plus the
// evaluation and synthetic-data helpers.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dubalign/config.hpp"
#include "dubalign/corpus.hpp"
#include "dubalign/eval.hpp"
#include "dubalign/eval_server.hpp"
#include "dubalign/pipeline.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/synth.hpp"

namespace fs = std::filesystem;
using namespace dubalign;

namespace {

struct Globals {
  std::string out_dir = "out";
  std::string config;
  int jobs = 1;
  bool force = false;
};

// Command-line overrides of config knobs; unset options leave the file value.
struct Overrides {
  std::optional<int> fps;
  std::optional<double> ssim_threshold;
  std::optional<int> window;
  std::optional<bool> drift;
  std::optional<int> stride;
  std::optional<double> energy_threshold;
  std::optional<double> max_start_diff;
  std::optional<double> max_dur_diff;
  std::optional<double> min_similarity;
  std::optional<int> max_window;

  void Attach(CLI::App* app) {
    app->add_option("--fps", fps, "Frame rate of both tracks");
    app->add_option("--ssim-threshold", ssim_threshold, "Minimum SSIM for a frame match");
    app->add_option("--window", window, "Search window in frames");
    app->add_option("--drift", drift, "Anchor the search at the last match (true/false)");
    app->add_option("--stride", stride, "Compare every k-th frame");
    app->add_option("--energy-threshold", energy_threshold, "Energy VAD threshold in dB");
    app->add_option("--max-start-diff", max_start_diff, "Start-time tolerance in seconds");
    app->add_option("--max-dur-diff", max_dur_diff, "Duration tolerance in seconds");
    app->add_option("--min-similarity", min_similarity, "Similarity a pair must exceed");
    app->add_option("--max-window", max_window, "Segments per side in a combined window");
  }

  void Apply(PipelineConfig& c) const {
    if (fps) c.fps = *fps;
    if (ssim_threshold) c.ssim_threshold = *ssim_threshold;
    if (window) c.search_window_frames = *window;
    if (drift) c.drift_compensation = *drift;
    if (stride) c.frame_stride = *stride;
    if (energy_threshold) c.energy_threshold_db = *energy_threshold;
    if (max_start_diff) c.max_start_diff_s = *max_start_diff;
    if (max_dur_diff) c.max_dur_diff_s = *max_dur_diff;
    if (min_similarity) c.min_similarity = *min_similarity;
    if (max_window) c.max_window_segments = *max_window;
  }
};

constexpr const char* kRunConf = "run.conf";

// Loads --config, or the copy a previous invocation left in the output
// directory. A fresh --config is copied there with its base directory so
// later stages can run without repeating it.
PipelineOptions BuildOptions(const Globals& g, const Overrides& o) {
  PipelineOptions opts;
  opts.out_dir = g.out_dir;
  opts.jobs = g.jobs;
  opts.force = g.force;
  const fs::path saved = opts.out_dir / kRunConf;
  if (!g.config.empty()) {
    opts.file = ConfigFile::Load(g.config);
    opts.config_dir = fs::absolute(fs::path(g.config)).parent_path();
    std::string copy = "run.config_dir = " + opts.config_dir.string() + "\n";
    for (const auto& [k, v] : opts.file.entries()) {
      if (k != "run.config_dir") copy += k + " = " + v + "\n";
    }
    WriteFileAtomic(saved, copy);
  } else if (fs::exists(saved)) {
    opts.file = ConfigFile::Load(saved);
    const auto* dir = opts.file.Find("run.config_dir");
    opts.config_dir = dir ? fs::path(*dir) : opts.out_dir;
  } else {
    Fail(ErrorKind::kUsage, "no --config given and " + saved.string() + " does not exist");
  }
  opts.cfg = ApplyConfig(opts.file);
  o.Apply(opts.cfg);
  ValidateConfig(opts.cfg);
  return opts;
}

int ExitCode(ErrorKind k) {
  switch (k) {
    case ErrorKind::kUsage: return 2;
    case ErrorKind::kMissingArtifact: return 3;
    case ErrorKind::kValidation: return 4;
    default: return 1;
  }
}

std::map<std::string, std::string> PairLabels(const fs::path& manifest) {
  std::map<std::string, std::string> labels;
  if (!fs::exists(manifest)) return labels;
  for (const auto& e : LoadManifest(manifest)) labels[e.pair_id] = std::string(LabelName(e.left.label));
  return labels;
}

fs::path ManifestOrFail(const Globals& g) {
  const fs::path manifest = fs::path(g.out_dir) / "corpus" / "manifest.jsonl";
  if (!fs::exists(manifest)) {
    Fail(ErrorKind::kMissingArtifact, "missing " + manifest.string() + "; run `dubalign export` first");
  }
  return manifest;
}

EvalServer* g_server = nullptr;

void StopServer(int) {
  if (g_server != nullptr) g_server->Stop();
}

int Main(int argc, char** argv) {
  CLI::App app{"Builds a parallel speech corpus from two dubbed versions of the same video."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out-dir", g.out_dir, "Working directory for artifacts")->capture_default_str();
  app.add_option("--config", g.config, "Config file (key = value lines)");
  app.add_option("--jobs", g.jobs, "Worker threads inside a stage")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_flag("--force", g.force, "Rerun stages even when up to date");

  Overrides overrides;
  std::optional<Stage> stage_to_run;
  bool run_all = false;
  for (Stage s : kAllStages) {
    auto* sub = app.add_subcommand(std::string(StageName(s)), "Run the " + std::string(StageName(s)) + " stage");
    overrides.Attach(sub);
    sub->callback([&stage_to_run, s] { stage_to_run = s; });
  }
  auto* run = app.add_subcommand("run", "Run every stage in order");
  overrides.Attach(run);
  run->callback([&run_all] { run_all = true; });

  // eval sample
  auto* eval = app.add_subcommand("eval", "Evaluation helpers");
  eval->require_subcommand(1);
  eval->fallthrough();
  auto* sample = eval->add_subcommand("sample", "Draw a reproducible sample of pairs to rate");
  std::size_t sample_n = 0;
  std::optional<std::uint64_t> sample_seed;
  bool duration_filter = false;
  double min_dur = 2.0, max_dur = 10.0;
  sample->add_option("--n", sample_n, "Number of pairs")->required();
  sample->add_option("--seed", sample_seed, "Random seed (required)");
  sample->add_flag("--duration-filter", duration_filter, "Keep pairs whose sides last 2-10 s");
  sample->add_option("--min-dur", min_dur, "Lower duration bound in seconds");
  sample->add_option("--max-dur", max_dur, "Upper duration bound in seconds");

  auto* serve = app.add_subcommand("serve", "Serve pairs for rating over HTTP");
  std::string host = "127.0.0.1", ratings_path, sample_path, ui_dir;
  int port = 8080;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--ratings", ratings_path, "Rating log (default <out-dir>/eval/ratings.jsonl)");
  serve->add_option("--sample", sample_path, "Sample file (default <out-dir>/eval/sample.json if present)");
  serve->add_option("--ui", ui_dir, "Static UI bundle to mount at /");

  auto* rate = app.add_subcommand("rate", "Record one rating");
  std::string rate_pair, rate_annotator;
  double rate_score = -1;
  rate->add_option("--pair", rate_pair)->required();
  rate->add_option("--annotator", rate_annotator)->required();
  rate->add_option("--score", rate_score, "0, 0.5 or 1")->required();
  rate->add_option("--ratings", ratings_path, "Rating log");

  auto* report = app.add_subcommand("report", "Score distribution, accuracy and agreement");
  bool report_json = false;
  report->add_option("--ratings", ratings_path, "Rating log");
  report->add_flag("--json", report_json, "Print the JSON the service returns");

  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotators");
  std::string kappa_a, kappa_b;
  kappa->add_option("--first", kappa_a)->required();
  kappa->add_option("--second", kappa_b)->required();
  kappa->add_option("--ratings", ratings_path, "Rating log");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dubbed pair with ground truth");
  SynthSpec spec;
  std::vector<std::string> blocks;
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--fps", spec.fps)->capture_default_str();
  synth->add_option("--width", spec.width)->capture_default_str();
  synth->add_option("--height", spec.height)->capture_default_str();
  synth->add_option("--one-to-one", spec.one_to_one)->capture_default_str();
  synth->add_option("--one-to-many", spec.one_to_many)->capture_default_str();
  synth->add_option("--many-to-one", spec.many_to_one)->capture_default_str();
  synth->add_option("--decoys", spec.decoys)->capture_default_str();
  synth->add_option("--unrecognized", spec.unrecognized)->capture_default_str();
  synth->add_option("--min-frames", spec.min_content_frames, "Pad content to at least this many frames");
  synth->add_option("--noise", spec.pixel_noise)->capture_default_str();
  synth->add_option("--block", blocks, "Commercial block TRACK@START_S:LENGTH_S (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const fs::path out(g.out_dir);
  auto default_ratings = [&] {
    return ratings_path.empty() ? out / "eval" / "ratings.jsonl" : fs::path(ratings_path);
  };

  if (stage_to_run || run_all) {
    Pipeline p(BuildOptions(g, overrides), std::cerr);
    if (run_all) {
      p.RunAll();
    } else {
      p.RunStage(*stage_to_run);
    }
    return 0;
  }
  if (*sample) {
    if (!sample_seed) Fail(ErrorKind::kUsage, "eval sample needs an explicit --seed");
    const auto pairs = LoadManifest(ManifestOrFail(g));
    std::optional<DurationFilter> filter;
    if (duration_filter || sample->count("--min-dur") || sample->count("--max-dur")) {
      filter = DurationFilter{min_dur, max_dur};
    }
    const auto ids = SamplePairs(pairs, sample_n, *sample_seed, filter);
    const auto path = out / "eval" / "sample.json";
    WriteSample(path, ids, *sample_seed);
    std::cout << ids.size() << " pairs written to " << path.string() << "\n";
    return 0;
  }
  if (*serve) {
    EvalServerOptions o;
    o.corpus_dir = ManifestOrFail(g).parent_path();
    o.ratings = default_ratings();
    if (!sample_path.empty()) {
      o.sample = sample_path;
    } else if (fs::exists(out / "eval" / "sample.json")) {
      o.sample = out / "eval" / "sample.json";
    }
    if (!ui_dir.empty()) o.ui_dir = ui_dir;
    EvalServer server(o);
    g_server = &server;
    std::signal(SIGINT, StopServer);
    std::signal(SIGTERM, StopServer);
    std::cerr << "serving " << server.queue().size() << " pairs on http://" << host << ":" << port << "\n";
    server.Listen(host, port);
    g_server = nullptr;
    return 0;
  }
  if (*rate) {
    std::set<std::string> known;
    for (const auto& e : LoadManifest(ManifestOrFail(g))) known.insert(e.pair_id);
    RatingStore store(default_ratings(), known);
    store.Record({rate_pair, rate_annotator, rate_score, 0});
    return 0;
  }
  if (*report) {
    const auto r = BuildReport(ReadRatings(default_ratings()), PairLabels(out / "corpus" / "manifest.jsonl"));
    std::cout << (report_json ? ReportToJson(r).dump(2) + "\n" : FormatReport(r));
    return 0;
  }
  if (*kappa) {
    std::map<std::string, double> a, b;
    for (const auto& r : ReadRatings(default_ratings())) {
      if (r.annotator == kappa_a) a[r.pair_id] = r.score;
      if (r.annotator == kappa_b) b[r.pair_id] = r.score;
    }
    std::cout << FormatDouble(CohenKappa(a, b)) << "\n";
    return 0;
  }
  if (*synth) {
    for (const auto& b : blocks) spec.blocks.push_back(ParseSynthBlock(b));
    const SynthTruth t = GenerateSynth(spec, out, g.jobs);
    std::cout << "wrote " << t.pairs.size() << " planted pairs, " << t.decoy_left.size()
              << " decoys, " << t.content_frames << " content frames to " << out.string() << "\n";
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Main(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

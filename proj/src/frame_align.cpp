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

#include "dubalign/frame_align.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "dubalign/parallel.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/ssim.hpp"

namespace dubalign {
namespace {

// Prepared frames of one track over a sliding index range. Indices only move
// forward in both search modes, so frames below the current floor are evicted.
class PreparedWindow {
 public:
  PreparedWindow(const FrameSource& src, int jobs) : src_(src), jobs_(jobs) {}

  const PreparedFrame& Get(std::size_t i) {
    EnsureUpTo(i + 1);
    return *frames_[i - base_];
  }

  // Loads every frame in [loaded end, end). Not safe to call concurrently.
  void EnsureUpTo(std::size_t end) {
    end = std::min(end, src_.size());
    const std::size_t from = base_ + frames_.size();
    if (end <= from) return;
    std::vector<std::unique_ptr<PreparedFrame>> batch(end - from);
    ParallelFor(batch.size(), jobs_, [&](std::size_t k) {
      batch[k] = std::make_unique<PreparedFrame>(src_.Load(from + k));
    });
    for (auto& f : batch) frames_.push_back(std::move(f));
  }

  // Read-only access for frames already loaded by EnsureUpTo.
  const PreparedFrame& Loaded(std::size_t i) const { return *frames_[i - base_]; }

  void DropBelow(std::size_t floor) {
    while (base_ < floor && !frames_.empty()) {
      frames_.pop_front();
      ++base_;
    }
    if (frames_.empty()) base_ = std::max(base_, floor);
  }

 private:
  const FrameSource& src_;
  int jobs_;
  std::size_t base_ = 0;
  std::deque<std::unique_ptr<PreparedFrame>> frames_;
};

constexpr std::size_t kStrictBlock = 256;
constexpr std::size_t kSequentialProbe = 8;

void CheckPassable(const FrameSource& source, const FrameSource& target) {
  if (source.size() == 0 || target.size() == 0) {
    Fail(ErrorKind::kValidation, "frame pass needs non-empty tracks (" + source.track().str() +
                                     ": " + std::to_string(source.size()) + ", " +
                                     target.track().str() + ": " +
                                     std::to_string(target.size()) + " frames)");
  }
  if (source.fps() != target.fps()) {
    Fail(ErrorKind::kValidation, "fps mismatch: " + source.track().str() + " at " +
                                     std::to_string(source.fps()) + " vs " +
                                     target.track().str() + " at " + std::to_string(target.fps()));
  }
}

std::vector<bool> StrictPass(const FrameSource& source, const FrameSource& target,
                             const PipelineConfig& cfg, int jobs) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  const auto window = static_cast<std::size_t>(cfg.search_window_frames);
  const auto stride = static_cast<std::size_t>(cfg.frame_stride);
  std::vector<bool> keep(n, false);
  PreparedWindow targets(target, jobs);

  for (std::size_t block = 0; block < n; block += kStrictBlock) {
    const std::size_t block_end = std::min(n, block + kStrictBlock);
    std::vector<std::size_t> probes;
    for (std::size_t t = block; t < block_end; ++t) {
      if (t % stride == 0) probes.push_back(t);
    }
    std::vector<std::unique_ptr<PreparedFrame>> sources(probes.size());
    ParallelFor(probes.size(), jobs, [&](std::size_t k) {
      sources[k] = std::make_unique<PreparedFrame>(source.Load(probes[k]));
    });
    targets.DropBelow(block);
    targets.EnsureUpTo(block_end + window);

    std::vector<char> verdict(probes.size(), 0);
    ParallelFor(probes.size(), jobs, [&](std::size_t k) {
      const std::size_t t = probes[k];
      const std::size_t end = std::min(m, t + window);
      for (std::size_t j = t; j < end; ++j) {
        if (Ssim(*sources[k], targets.Loaded(j)) >= cfg.ssim_threshold) {
          verdict[k] = 1;
          return;
        }
      }
    });
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const std::size_t last = std::min(n, probes[k] + stride);
      for (std::size_t t = probes[k]; t < last; ++t) keep[t] = verdict[k] != 0;
    }
  }
  return keep;
}

std::vector<bool> DriftPass(const FrameSource& source, const FrameSource& target,
                            const PipelineConfig& cfg, int jobs) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  const auto window = static_cast<std::size_t>(cfg.search_window_frames);
  const auto stride = static_cast<std::size_t>(cfg.frame_stride);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<bool> keep(n, false);
  PreparedWindow targets(target, jobs);
  std::size_t anchor = 0;

  for (std::size_t t = 0; t < n; t += stride) {
    const PreparedFrame probe(source.Load(t));
    const std::size_t end = std::min(m, anchor + window);
    std::size_t hit = kNone;
    const std::size_t probe_end = jobs > 1 ? std::min(end, anchor + kSequentialProbe) : end;
    for (std::size_t j = anchor; j < probe_end; ++j) {
      if (Ssim(probe, targets.Get(j)) >= cfg.ssim_threshold) {
        hit = j;
        break;
      }
    }
    if (hit == kNone && probe_end < end) {
      // Remaining window scanned in parallel chunks; the smallest hit wins,
      // which is what the sequential first-hit scan would return.
      targets.EnsureUpTo(end);
      const std::size_t chunks = static_cast<std::size_t>(jobs);
      const std::size_t span = (end - probe_end + chunks - 1) / chunks;
      std::vector<std::size_t> first(chunks, kNone);
      ParallelFor(chunks, jobs, [&](std::size_t c) {
        const std::size_t lo = probe_end + c * span;
        const std::size_t hi = std::min(end, lo + span);
        for (std::size_t j = lo; j < hi; ++j) {
          if (Ssim(probe, targets.Loaded(j)) >= cfg.ssim_threshold) {
            first[c] = j;
            return;
          }
        }
      });
      hit = *std::min_element(first.begin(), first.end());
    }
    const bool kept = hit != kNone;
    if (kept) {
      anchor = hit;
      targets.DropBelow(anchor);
    }
    const std::size_t last = std::min(n, t + stride);
    for (std::size_t k = t; k < last; ++k) keep[k] = kept;
  }
  return keep;
}

}  // namespace

FrameManifest ReadFrameManifest(const std::filesystem::path& path, TrackId track) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "frame manifest not found: " + path.string());
  FrameManifest out;
  out.track = std::move(track);
  out.base_dir = path.parent_path();
  std::string line;
  int line_no = 0;
  bool have_fps = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (!have_fps) {
      if (line.rfind("fps=", 0) != 0) Fail(ErrorKind::kValidation, where + "expected 'fps=<int>' header");
      try {
        std::size_t used = 0;
        out.fps = std::stoi(line.substr(4), &used);
        if (used != line.size() - 4 || out.fps <= 0) throw std::invalid_argument("fps");
      } catch (const std::exception&) {
        Fail(ErrorKind::kValidation, where + "bad fps value");
      }
      have_fps = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) Fail(ErrorKind::kValidation, where + "expected '<index>\\t<path>'");
    std::size_t index = 0;
    try {
      std::size_t used = 0;
      index = std::stoul(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("index");
    } catch (const std::exception&) {
      Fail(ErrorKind::kValidation, where + "bad frame index");
    }
    if (index != out.entries.size()) {
      Fail(ErrorKind::kValidation, where + "frame indices must be gap-free from 0 (expected " +
                                       std::to_string(out.entries.size()) + ")");
    }
    out.entries.push_back({index, line.substr(tab + 1)});
  }
  if (!have_fps) Fail(ErrorKind::kValidation, path.string() + ": missing 'fps=' header");
  return out;
}

void WriteFrameManifest(const std::filesystem::path& path, const FrameManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << "fps=" << manifest.fps << '\n';
  for (const auto& e : manifest.entries) out << e.index << '\t' << e.path.generic_string() << '\n';
}

std::size_t RemovalMask::kept_count() const {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
}

void RemovalMask::Compact(int fps) {
  compaction.assign(keep.size(), std::nullopt);
  std::int64_t k = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) compaction[i] = k++ * 1000 / fps;
  }
}

RemovalMask FramePass(const FrameSource& source, const FrameSource& target,
                      const PipelineConfig& cfg, int jobs) {
  ValidateConfig(cfg);
  CheckPassable(source, target);
  RemovalMask mask;
  mask.track = source.track();
  mask.keep = cfg.drift_compensation ? DriftPass(source, target, cfg, jobs)
                                     : StrictPass(source, target, cfg, jobs);
  mask.Compact(source.fps());
  return mask;
}

CleanResult CleanPair(const FrameSource& d1, const FrameSource& d2, const PipelineConfig& cfg,
                      int jobs) {
  CleanResult r;
  r.first = FramePass(d1, d2, cfg, jobs);
  r.second = FramePass(d2, d1, cfg, jobs);
  r.first_duration_s = r.first.compacted_duration_s(d1.fps());
  r.second_duration_s = r.second.compacted_duration_s(d2.fps());
  return r;
}

void WriteMask(const std::filesystem::path& path, const RemovalMask& mask) {
  std::string out;
  for (std::size_t i = 0; i < mask.keep.size(); ++i) {
    out += std::to_string(i) + '\t' + (mask.keep[i] ? "1" : "0") + '\t';
    if (i < mask.compaction.size() && mask.compaction[i]) {
      out += std::to_string(*mask.compaction[i]);
    } else {
      out += '-';
    }
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

RemovalMask ReadMask(const std::filesystem::path& path, TrackId track) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "removal mask not found: " + path.string());
  RemovalMask mask;
  mask.track = std::move(track);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string index, keep, ms;
    if (!std::getline(row, index, '\t') || !std::getline(row, keep, '\t') ||
        !std::getline(row, ms)) {
      Fail(ErrorKind::kValidation, path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (index != std::to_string(mask.keep.size()) || (keep != "0" && keep != "1") ||
        ((keep == "0") != (ms == "-"))) {
      Fail(ErrorKind::kValidation, path.string() + ":" + std::to_string(line_no) + ": invalid row");
    }
    mask.keep.push_back(keep == "1");
    mask.compaction.push_back(ms == "-" ? std::nullopt : std::optional<Millis>(std::stoll(ms)));
  }
  return mask;
}

AudioTrack CompactAudio(const AudioTrack& audio, const RemovalMask& mask, int fps) {
  AudioTrack out;
  out.track = audio.track;
  out.sample_rate = audio.sample_rate;
  const auto total = static_cast<std::int64_t>(audio.samples.size());
  auto boundary = [&](std::int64_t k) {
    return std::min<std::int64_t>(total, k * audio.sample_rate / fps);
  };
  for (std::size_t k = 0; k < mask.keep.size(); ++k) {
    if (!mask.keep[k]) continue;
    const auto lo = boundary(static_cast<std::int64_t>(k));
    const auto hi = boundary(static_cast<std::int64_t>(k) + 1);
    out.samples.insert(out.samples.end(), audio.samples.begin() + lo, audio.samples.begin() + hi);
  }
  return out;
}

}  // namespace dubalign

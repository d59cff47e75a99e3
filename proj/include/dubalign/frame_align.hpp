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
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dubalign/audio.hpp"
#include "dubalign/config.hpp"
#include "dubalign/core.hpp"
#include "dubalign/image.hpp"

namespace dubalign {

struct FrameEntry {
  std::size_t index = 0;
  std::filesystem::path path;  // absolute, or relative to the manifest's directory
};

// Text file: header `fps=<int>`, then one `<index>\t<path>` line per frame.
struct FrameManifest {
  TrackId track;
  int fps = 30;
  std::vector<FrameEntry> entries;
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(const FrameEntry& e) const {
    return e.path.is_absolute() ? e.path : base_dir / e.path;
  }
};

FrameManifest ReadFrameManifest(const std::filesystem::path& path, TrackId track);
void WriteFrameManifest(const std::filesystem::path& path, const FrameManifest& manifest);

// Random access to one track's frames.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const TrackId& track() const = 0;
  virtual int fps() const = 0;
  virtual std::size_t size() const = 0;
  virtual FrameImage Load(std::size_t index) const = 0;
};

class ManifestFrameSource final : public FrameSource {
 public:
  explicit ManifestFrameSource(FrameManifest manifest) : manifest_(std::move(manifest)) {}
  const TrackId& track() const override { return manifest_.track; }
  int fps() const override { return manifest_.fps; }
  std::size_t size() const override { return manifest_.entries.size(); }
  FrameImage Load(std::size_t index) const override {
    return ReadFrame(manifest_.Resolve(manifest_.entries.at(index)));
  }

 private:
  FrameManifest manifest_;
};

class MemoryFrameSource final : public FrameSource {
 public:
  MemoryFrameSource(TrackId track, int fps, std::vector<FrameImage> frames)
      : track_(std::move(track)), fps_(fps), frames_(std::move(frames)) {}
  const TrackId& track() const override { return track_; }
  int fps() const override { return fps_; }
  std::size_t size() const override { return frames_.size(); }
  FrameImage Load(std::size_t index) const override { return frames_.at(index); }

 private:
  TrackId track_;
  int fps_;
  std::vector<FrameImage> frames_;
};

// Per-frame keep/remove verdict for one track plus the compacted timeline.
struct RemovalMask {
  TrackId track;
  std::vector<bool> keep;
  // Start of each kept frame on the compacted timeline; nullopt for removed frames.
  std::vector<std::optional<Millis>> compaction;

  std::size_t kept_count() const;
  std::size_t removed_count() const { return keep.size() - kept_count(); }
  double compacted_duration_s(int fps) const {
    return static_cast<double>(kept_count()) / static_cast<double>(fps);
  }

  // Fills `compaction` from `keep`: the k-th kept frame starts at k*1000/fps ms.
  void Compact(int fps);
  bool operator==(const RemovalMask&) const = default;
};

// One directed pass: keeps a source frame iff some target frame in
// [anchor, anchor + search_window_frames) reaches ssim >= ssim_threshold.
// Strict mode anchors at the source index itself; drift compensation anchors
// at the target index of the previous confirmed match. The scan stops at the
// first hit. `jobs` only changes speed, never the verdicts.
RemovalMask FramePass(const FrameSource& source, const FrameSource& target,
                      const PipelineConfig& cfg, int jobs = 1);

struct CleanResult {
  RemovalMask first;   // mask for d1 (searched against d2)
  RemovalMask second;  // mask for d2 (searched against d1)
  double first_duration_s = 0;
  double second_duration_s = 0;
};

CleanResult CleanPair(const FrameSource& d1, const FrameSource& d2, const PipelineConfig& cfg,
                      int jobs = 1);

// `<index>\t<keep:0|1>\t<new_ms|->` per frame.
void WriteMask(const std::filesystem::path& path, const RemovalMask& mask);
RemovalMask ReadMask(const std::filesystem::path& path, TrackId track);

// Drops the audio belonging to removed frames. Frame k owns samples
// [floor(k*sr/fps), floor((k+1)*sr/fps)); samples past the last frame are dropped.
AudioTrack CompactAudio(const AudioTrack& audio, const RemovalMask& mask, int fps);

}  // namespace dubalign

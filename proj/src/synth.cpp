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

#include "dubalign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>

#include "dubalign/audio.hpp"
#include "dubalign/frame_align.hpp"
#include "dubalign/parallel.hpp"
#include "dubalign/rng.hpp"
#include "dubalign/segment_io.hpp"
#include "dubalign/segmenter.hpp"

namespace dubalign {

using nlohmann::json;

namespace {

constexpr int kBlockPx = 4;
constexpr std::size_t kWordsPerTopic = 6;

// splitmix64 finalizer over a running combination.
std::uint64_t Mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ull ^ (b + 0x632BE59BD9B4E019ull) ^ (c << 17 | c >> 47);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t TrackSalt(const std::string& track) { return track == "D1" ? 11 : 23; }

const char* kSourceSyllables[] = {"ka", "le", "mi", "zu", "ro", "sa", "ne", "to",
                                  "ya", "gi", "bu", "de", "fa", "hu", "po", "ri"};
const char* kTopicSyllables[] = {"ba", "be", "bi", "bo", "da", "di",
                                 "do", "du", "ga", "go", "ma", "mo"};
const char* kFillerSyllables[] = {"wa", "we", "wi", "wo", "wu", "xa", "xo", "xu"};

std::string TopicWord(std::size_t topic, std::size_t w) {
  std::size_t n = topic * kWordsPerTopic + w;
  std::string out;
  for (int d = 0; d < 3; ++d) {
    out += kTopicSyllables[n % 12];
    n /= 12;
  }
  return out + "n";
}

std::string FillerWord(Rng& rng) {
  return std::string(kFillerSyllables[rng.Below(8)]) + kFillerSyllables[rng.Below(8)];
}

struct PlanSeg {
  int track = 0;  // 0 = D1, 1 = D2
  SegmentLabel label = SegmentLabel::kMale;
  Millis start = 0;
  Millis end = 0;
  std::optional<std::string> transcript;
  std::optional<std::string> translation;
  std::string id;
};

enum class ItemKind { kOneToOne, kOneToMany, kManyToOne, kDecoy, kUnrecognized };

class Planner {
 public:
  explicit Planner(const SynthSpec& spec) : spec_(spec), rng_(Mix(spec.seed, 0x5E6)) {}

  void Run();

  std::vector<PlanSeg> segs;
  std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, std::size_t>>>> planted;
  std::vector<std::size_t> decoy_segs;
  std::vector<std::size_t> unrecognized_segs;
  std::vector<std::vector<std::string>> topics;
  Millis end_ms = 0;

 private:
  std::size_t NewTopic() {
    std::vector<std::string> words;
    for (std::size_t w = 0; w < kWordsPerTopic; ++w) words.push_back(TopicWord(topics.size(), w));
    topics.push_back(words);
    return topics.size() - 1;
  }

  SegmentLabel PickLabel() {
    const auto r = rng_.Below(20);
    return r < 9 ? SegmentLabel::kFemale : r < 18 ? SegmentLabel::kMale : SegmentLabel::kMusic;
  }

  std::vector<std::string> Shuffled(std::vector<std::string> v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng_.Below(i)]);
    return v;
  }

  // Topic words with up to two out-of-vocabulary fillers mixed in.
  std::string Sentence(std::vector<std::string> words) {
    const auto fillers = rng_.Below(3);
    for (std::uint64_t f = 0; f < fillers; ++f) {
      words.insert(words.begin() + static_cast<long>(rng_.Below(words.size() + 1)), FillerWord(rng_));
    }
    std::string out;
    for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
    return out;
  }

  std::string TopicSentence(std::size_t topic) {
    auto words = Shuffled(topics[topic]);
    words.resize(4 + rng_.Below(3));
    return Sentence(words);
  }

  std::string SourceSentence() {
    for (;;) {
      const auto n = 5 + rng_.Below(4);
      std::string out;
      for (std::uint64_t k = 0; k < n; ++k) {
        const auto syl = 2 + rng_.Below(2);
        std::string w;
        for (std::uint64_t s = 0; s < syl; ++s) w += kSourceSyllables[rng_.Below(16)];
        out += (k ? " " : "") + w;
      }
      if (used_sources_.insert(out).second) return out;
    }
  }

  std::size_t Add(int track, SegmentLabel label, Millis start, Millis dur) {
    PlanSeg s;
    s.track = track;
    s.label = label;
    s.start = start;
    s.end = start + dur;
    segs.push_back(s);
    return segs.size() - 1;
  }

  void GiveLeftText(std::size_t seg, const std::string& translation) {
    segs[seg].transcript = SourceSentence();
    segs[seg].translation = translation;
  }

  const SynthSpec& spec_;
  Rng rng_;
  std::set<std::string> used_sources_;
};

// Longer than the default start-time tolerance plus its margin.
constexpr Millis kIsolationMs = 11000;

void Planner::Run() {
  std::vector<ItemKind> items;
  items.insert(items.end(), spec_.one_to_one, ItemKind::kOneToOne);
  items.insert(items.end(), spec_.one_to_many, ItemKind::kOneToMany);
  items.insert(items.end(), spec_.many_to_one, ItemKind::kManyToOne);
  items.insert(items.end(), spec_.decoys, ItemKind::kDecoy);
  items.insert(items.end(), spec_.unrecognized, ItemKind::kUnrecognized);
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng_.Below(i)]);

  Millis cursor = 1000;
  for (ItemKind kind : items) {
    const SegmentLabel label = PickLabel();
    Millis region_end = cursor;
    switch (kind) {
      case ItemKind::kOneToOne:
      case ItemKind::kDecoy:
      case ItemKind::kUnrecognized: {
        const Millis da = 2000 + static_cast<Millis>(rng_.Below(5001));
        const Millis db = std::max<Millis>(1500, da + static_cast<Millis>(rng_.Below(2001)) - 1000);
        const Millis eps = static_cast<Millis>(rng_.Below(601));
        const auto a = Add(0, label, cursor, da);
        const auto b = Add(1, label, cursor + eps, db);
        if (kind == ItemKind::kOneToOne) {
          const auto t = NewTopic();
          GiveLeftText(a, TopicSentence(t));
          segs[b].transcript = TopicSentence(t);
          planted.push_back({"one-to-one", {{a, b}}});
        } else if (kind == ItemKind::kDecoy) {
          const auto tx = NewTopic();
          const auto ty = NewTopic();
          GiveLeftText(a, TopicSentence(tx));
          segs[b].transcript = TopicSentence(ty);
          decoy_segs.push_back(a);
          decoy_segs.push_back(b);
        } else {
          segs[b].transcript = TopicSentence(NewTopic());
          unrecognized_segs.push_back(a);
        }
        region_end = std::max(segs[a].end, segs[b].end);
        break;
      }
      case ItemKind::kOneToMany:
      case ItemKind::kManyToOne: {
        // A single member misses the duration rule by a wide margin; the two
        // together sit 0.4 s short of the anchor.
        const int anchor_track = kind == ItemKind::kOneToMany ? 0 : 1;
        const Millis total = 17000 + static_cast<Millis>(rng_.Below(1001));
        const Millis m1 = (total - 400) / 2 + static_cast<Millis>(rng_.Below(401)) - 200;
        const Millis m2 = total - 400 - m1;
        const Millis gap = 1000 + static_cast<Millis>(rng_.Below(501));
        const Millis eps = static_cast<Millis>(rng_.Below(301));
        const auto anchor = Add(anchor_track, label, cursor, total);
        const auto first = Add(1 - anchor_track, label, cursor + eps, m1);
        const auto second = Add(1 - anchor_track, label, segs[first].end + gap, m2);
        const auto t = NewTopic();
        auto words = Shuffled(topics[t]);
        const std::vector<std::string> half1(words.begin(), words.begin() + 3);
        const std::vector<std::string> half2(words.begin() + 3, words.end());
        if (kind == ItemKind::kOneToMany) {
          GiveLeftText(anchor, Sentence(words));
          segs[first].transcript = Sentence(half1);
          segs[second].transcript = Sentence(half2);
          planted.push_back({"one-to-many", {{anchor, first}, {anchor, second}}});
        } else {
          segs[anchor].transcript = Sentence(words);
          GiveLeftText(first, Sentence(half1));
          GiveLeftText(second, Sentence(half2));
          planted.push_back({"many-to-one", {{first, anchor}, {second, anchor}}});
        }
        region_end = std::max(segs[anchor].end, segs[second].end);
        break;
      }
    }
    cursor = region_end + 1200 + static_cast<Millis>(rng_.Below(1301));
    // Keep a decoy out of reach of the next item, or a run starting at the
    // decoy can grow into the next item's window and pass on its text.
    if (kind == ItemKind::kDecoy || kind == ItemKind::kUnrecognized) cursor += kIsolationMs;
  }
  end_ms = cursor + 1000;
}

// Signed triangle wave, exact in integer arithmetic.
std::int64_t Triangle(std::int64_t n, std::int64_t freq, std::int64_t amp) {
  const std::int64_t p = (n * freq) % kSampleRate;
  return p < kSampleRate / 2 ? -amp + 4 * amp * p / kSampleRate : 3 * amp - 4 * amp * p / kSampleRate;
}

void RenderSegment(std::vector<std::int16_t>& audio, const PlanSeg& s, std::uint64_t seed,
                   std::size_t index) {
  const std::int64_t begin = s.start * kSamplesPerMs;
  const std::int64_t end = std::min<std::int64_t>(s.end * kSamplesPerMs, static_cast<std::int64_t>(audio.size()));
  const std::int64_t fade = 10 * kSamplesPerMs;
  const std::int64_t pitch = s.track == 0 ? 0 : 12;
  Rng rng(Mix(seed, 0xA0D10, index));
  for (std::int64_t n = begin; n < end; ++n) {
    const std::int64_t t = n - begin;
    std::int64_t v = 0;
    switch (s.label) {
      case SegmentLabel::kFemale: v = Triangle(t, 300 + pitch, 7000); break;
      case SegmentLabel::kMale: v = Triangle(t, 140 + pitch, 7000); break;
      case SegmentLabel::kMusic:
        v = Triangle(t, 262, 3000) + Triangle(t, 330, 3000) + Triangle(t, 392, 3000);
        break;
      case SegmentLabel::kNoise: v = static_cast<std::int64_t>(rng.Below(3001)) - 1500; break;
      case SegmentLabel::kNoEnergy: v = 0; break;
    }
    const std::int64_t ramp = std::min({t, end - 1 - n, fade});
    v = v * ramp / fade;
    audio[static_cast<std::size_t>(n)] = static_cast<std::int16_t>(v);
  }
}

struct BlockFrames {
  std::size_t at = 0;      // content frame index the block precedes
  std::size_t length = 0;  // frames
};

std::vector<BlockFrames> TrackBlocks(const SynthSpec& spec, const std::string& track) {
  std::vector<BlockFrames> out;
  for (const auto& b : spec.blocks) {
    if (b.track != track) continue;
    out.push_back({static_cast<std::size_t>(std::llround(b.insert_at_s * spec.fps)),
                   static_cast<std::size_t>(std::llround(b.length_s * spec.fps))});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.at < y.at; });
  return out;
}

std::string ConfLine(const std::string& key, const std::string& value) {
  return key + " = " + value + "\n";
}

}  // namespace

SynthBlock ParseSynthBlock(const std::string& text) {
  const auto at = text.find('@');
  const auto colon = text.find(':', at == std::string::npos ? 0 : at);
  if (at == std::string::npos || colon == std::string::npos || at == 0) {
    Fail(ErrorKind::kUsage, "block must look like D2@30:10, got '" + text + "'");
  }
  SynthBlock b;
  b.track = text.substr(0, at);
  try {
    b.insert_at_s = std::stod(text.substr(at + 1, colon - at - 1));
    b.length_s = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    Fail(ErrorKind::kUsage, "block must look like D2@30:10, got '" + text + "'");
  }
  return b;
}

void ValidateSynthSpec(const SynthSpec& spec) {
  if (spec.fps <= 0) Fail(ErrorKind::kValidation, "synth fps must be positive");
  if (spec.width < 8 || spec.height < 8) Fail(ErrorKind::kValidation, "synth frames must be at least 8x8");
  if (spec.pixel_noise < 0) Fail(ErrorKind::kValidation, "pixel noise must be non-negative");
  if (spec.d1_language.empty() || spec.d2_language.empty()) {
    Fail(ErrorKind::kValidation, "synth languages must be non-empty");
  }
  for (const std::string track : {"D1", "D2"}) {
    std::size_t prev_at = 0;
    bool first = true;
    for (const auto& b : TrackBlocks(spec, track)) {
      if (b.length == 0) Fail(ErrorKind::kValidation, "block on " + track + " has no frames");
      if ((b.length * kSampleRate) % static_cast<std::size_t>(spec.fps) != 0) {
        Fail(ErrorKind::kValidation, "block of " + std::to_string(b.length) +
                                         " frames does not span whole audio samples at " +
                                         std::to_string(spec.fps) + " fps");
      }
      if (!first && b.at == prev_at) Fail(ErrorKind::kValidation, "two blocks at one position on " + track);
      prev_at = b.at;
      first = false;
    }
  }
  for (const auto& b : spec.blocks) {
    if (b.track != "D1" && b.track != "D2") Fail(ErrorKind::kValidation, "block track must be D1 or D2");
    if (b.insert_at_s < 0) Fail(ErrorKind::kValidation, "block position must be non-negative");
  }
}

std::vector<std::int64_t> SynthFrameLayout(const SynthSpec& spec, const std::string& track,
                                           std::size_t content_frames) {
  std::vector<std::int64_t> layout;
  std::int64_t commercial = 0;
  std::size_t c = 0;
  for (const auto& b : TrackBlocks(spec, track)) {
    if (b.at > content_frames) Fail(ErrorKind::kValidation, "block lies beyond the content");
    for (; c < b.at; ++c) layout.push_back(static_cast<std::int64_t>(c));
    for (std::size_t k = 0; k < b.length; ++k) layout.push_back(-1 - commercial++);
  }
  for (; c < content_frames; ++c) layout.push_back(static_cast<std::int64_t>(c));
  return layout;
}

FrameImage SynthContentFrame(const SynthSpec& spec, std::size_t content_index) {
  Rng rng(Mix(spec.seed, 0xF4A3E, content_index));
  FrameImage img(spec.width, spec.height);
  const int bw = (spec.width + kBlockPx - 1) / kBlockPx;
  const int bh = (spec.height + kBlockPx - 1) / kBlockPx;
  std::vector<std::uint8_t> blocks(static_cast<std::size_t>(bw * bh));
  for (auto& v : blocks) v = static_cast<std::uint8_t>(30 + rng.Below(196));
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      img.at(x, y) = blocks[static_cast<std::size_t>((y / kBlockPx) * bw + x / kBlockPx)];
    }
  }
  return img;
}

// Vertical stripes two pixels wide: no block structure shared with content.
FrameImage SynthCommercialFrame(const SynthSpec& spec, std::size_t commercial_index) {
  Rng rng(Mix(spec.seed, 0xC033, commercial_index));
  FrameImage img(spec.width, spec.height);
  std::vector<std::uint8_t> columns(static_cast<std::size_t>((spec.width + 1) / 2));
  for (auto& v : columns) v = static_cast<std::uint8_t>(rng.Below(256));
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) img.at(x, y) = columns[static_cast<std::size_t>(x / 2)];
  }
  return img;
}

FrameImage SynthTrackFrame(const SynthSpec& spec, const std::string& track,
                           const std::vector<std::int64_t>& layout, std::size_t raw_index) {
  const std::int64_t slot = layout.at(raw_index);
  if (slot < 0) return SynthCommercialFrame(spec, static_cast<std::size_t>(-1 - slot));
  FrameImage img = SynthContentFrame(spec, static_cast<std::size_t>(slot));
  if (spec.pixel_noise == 0) return img;
  Rng rng(Mix(spec.seed, TrackSalt(track), raw_index));
  const auto span = static_cast<std::uint64_t>(2 * spec.pixel_noise + 1);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      int noise = 0;
      for (int k = 0; k < 4; ++k) noise += static_cast<int>(rng.Below(span)) - spec.pixel_noise;
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(img.at(x, y) + noise, 0, 255));
    }
  }
  return img;
}

json TruthToJson(const SynthTruth& t) {
  json tracks = json::array();
  for (const auto& tr : t.tracks) {
    json removed = json::array();
    for (const auto& [b, e] : tr.removed) removed.push_back({b, e});
    tracks.push_back({{"track", tr.track}, {"raw_frames", tr.raw_frames}, {"removed", removed}});
  }
  json pairs = json::array();
  for (const auto& p : t.pairs) pairs.push_back({{"kind", p.kind}, {"left", p.left}, {"right", p.right}});
  return {{"seed", t.seed},
          {"fps", t.fps},
          {"content_frames", t.content_frames},
          {"tracks", tracks},
          {"pairs", pairs},
          {"decoys", {{"left", t.decoy_left}, {"right", t.decoy_right}}},
          {"unrecognized", t.unrecognized}};
}

SynthTruth TruthFromJson(const json& j) {
  SynthTruth t;
  try {
    t.seed = j.at("seed").get<std::uint64_t>();
    t.fps = j.at("fps").get<int>();
    t.content_frames = j.at("content_frames").get<std::size_t>();
    for (const auto& tr : j.at("tracks")) {
      SynthTrackTruth s;
      s.track = tr.at("track").get<std::string>();
      s.raw_frames = tr.at("raw_frames").get<std::size_t>();
      for (const auto& r : tr.at("removed")) s.removed.emplace_back(r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>());
      t.tracks.push_back(std::move(s));
    }
    for (const auto& p : j.at("pairs")) {
      t.pairs.push_back({p.at("kind").get<std::string>(), p.at("left").get<std::vector<std::string>>(),
                         p.at("right").get<std::vector<std::string>>()});
    }
    t.decoy_left = j.at("decoys").at("left").get<std::vector<std::string>>();
    t.decoy_right = j.at("decoys").at("right").get<std::vector<std::string>>();
    t.unrecognized = j.at("unrecognized").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kValidation, std::string("malformed synth truth: ") + e.what());
  }
  return t;
}

SynthTruth ReadTruth(const std::filesystem::path& path) {
  try {
    return TruthFromJson(json::parse(ReadFile(path)));
  } catch (const json::exception& e) {
    Fail(ErrorKind::kValidation, path.string() + ": " + e.what());
  }
}

SynthTruth GenerateSynth(const SynthSpec& spec, const std::filesystem::path& out_dir, int jobs) {
  ValidateSynthSpec(spec);
  Planner plan(spec);
  plan.Run();

  const std::size_t planned_frames =
      static_cast<std::size_t>((plan.end_ms * spec.fps + 999) / 1000);
  const std::size_t content_frames = std::max(planned_frames, spec.min_content_frames);
  const std::size_t content_samples =
      content_frames * static_cast<std::size_t>(kSampleRate) / static_cast<std::size_t>(spec.fps);
  const Millis content_ms = static_cast<Millis>(content_samples) / kSamplesPerMs;
  if (plan.end_ms > content_ms) Fail(ErrorKind::kValidation, "segment plan exceeds the content");

  // Occasional noise rows inside the gaps between items.
  Rng gap_rng(Mix(spec.seed, 0x6A9));
  for (int track = 0; track < 2; ++track) {
    std::vector<std::pair<Millis, Millis>> spans;
    for (const auto& s : plan.segs) {
      if (s.track == track) spans.emplace_back(s.start, s.end);
    }
    std::sort(spans.begin(), spans.end());
    Millis prev = 0;
    for (const auto& [b, e] : spans) {
      if (b - prev >= 1000 && gap_rng.Below(4) == 0) {
        PlanSeg n;
        n.track = track;
        n.label = SegmentLabel::kNoise;
        n.start = prev + 300;
        n.end = b - 300;
        plan.segs.push_back(n);
      }
      prev = e;
    }
  }

  SynthTruth truth;
  truth.seed = spec.seed;
  truth.fps = spec.fps;
  truth.content_frames = content_frames;
  const std::string names[2] = {"D1", "D2"};
  const std::string languages[2] = {spec.d1_language, spec.d2_language};

  std::string mt_table;
  for (int track = 0; track < 2; ++track) {
    const TrackId tid(names[track]);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < plan.segs.size(); ++i) {
      if (plan.segs[i].track == track) order.push_back(i);
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return plan.segs[a].start < plan.segs[b].start; });

    VadReport vad;
    vad.track = tid;
    std::string asr_table;
    std::size_t ordinal = 0;
    Millis prev = 0;
    for (std::size_t i : order) {
      PlanSeg& s = plan.segs[i];
      if (s.start > prev) vad.segments.push_back({SegmentLabel::kNoEnergy, TimeSpan(prev, s.start)});
      vad.segments.push_back({s.label, TimeSpan(s.start, s.end)});
      prev = s.end;
      if (!IsMatchable(s.label)) continue;
      s.id = SegmentIdFor(tid, ++ordinal);
      const json row = {{"track", names[track]},
                        {"start_ms", s.start},
                        {"end_ms", s.end},
                        {"text", s.transcript ? json(*s.transcript) : json(nullptr)}};
      asr_table += row.dump() + "\n";
      if (s.transcript && s.translation) {
        mt_table += json({{"source", *s.transcript}, {"target", *s.translation}}).dump() + "\n";
      }
    }
    if (content_ms > prev) vad.segments.push_back({SegmentLabel::kNoEnergy, TimeSpan(prev, content_ms)});

    const auto dir = out_dir / names[track];
    std::filesystem::create_directories(dir / "frames");
    WriteFileAtomic(dir / "vad.tsv", SerializeVad(vad));
    WriteFileAtomic(dir / "asr.jsonl", asr_table);

    // Content audio, then commercials spliced in at their frame positions.
    std::vector<std::int16_t> content(content_samples, 0);
    for (std::size_t i : order) RenderSegment(content, plan.segs[i], spec.seed, i);
    const auto layout = SynthFrameLayout(spec, names[track], content_frames);
    std::vector<std::int16_t> raw;
    raw.reserve(content.size());
    std::size_t copied = 0;
    std::size_t block_no = 0;
    for (const auto& b : TrackBlocks(spec, names[track])) {
      const std::size_t at = b.at * kSampleRate / static_cast<std::size_t>(spec.fps);
      raw.insert(raw.end(), content.begin() + static_cast<long>(copied), content.begin() + static_cast<long>(at));
      copied = at;
      Rng noise(Mix(spec.seed, 0xB10C + TrackSalt(names[track]), block_no++));
      const std::size_t n = b.length * kSampleRate / static_cast<std::size_t>(spec.fps);
      for (std::size_t k = 0; k < n; ++k) {
        raw.push_back(static_cast<std::int16_t>(static_cast<std::int64_t>(noise.Below(10001)) - 5000 +
                                                Triangle(static_cast<std::int64_t>(k), 1000, 3000)));
      }
    }
    raw.insert(raw.end(), content.begin() + static_cast<long>(copied), content.end());
    WriteWav(dir / "audio.wav", raw);

    FrameManifest manifest;
    manifest.track = tid;
    manifest.fps = spec.fps;
    SynthTrackTruth tt;
    tt.track = names[track];
    tt.raw_frames = layout.size();
    for (std::size_t i = 0; i < layout.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "frames/%06zu.y8", i);
      manifest.entries.push_back({i, name});
      if (layout[i] < 0) {
        if (tt.removed.empty() || tt.removed.back().second != i) {
          tt.removed.emplace_back(i, i + 1);
        } else {
          ++tt.removed.back().second;
        }
      }
    }
    ParallelFor(layout.size(), jobs, [&](std::size_t i) {
      WriteY8(dir / manifest.entries[i].path, SynthTrackFrame(spec, names[track], layout, i));
    });
    WriteFrameManifest(dir / "frames.txt", manifest);
    truth.tracks.push_back(std::move(tt));
  }
  WriteFileAtomic(out_dir / "mt.jsonl", mt_table);

  // Each topic owns two coordinates: a shared axis and a per-word wobble.
  const std::size_t dim = 2 * std::max<std::size_t>(plan.topics.size(), 1);
  std::string emb = std::to_string(plan.topics.size() * kWordsPerTopic) + " " + std::to_string(dim) + "\n";
  Rng emb_rng(Mix(spec.seed, 0xE3B));
  for (std::size_t t = 0; t < plan.topics.size(); ++t) {
    for (const auto& word : plan.topics[t]) {
      const auto wobble = static_cast<std::int64_t>(emb_rng.Below(801)) - 400;  // [-0.4, 0.4]
      emb += word;
      for (std::size_t d = 0; d < dim; ++d) {
        if (d == 2 * t) {
          emb += " 1";
        } else if (d == 2 * t + 1) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), " %s%lld.%03lld", wobble < 0 ? "-" : "",
                        static_cast<long long>(std::llabs(wobble) / 1000),
                        static_cast<long long>(std::llabs(wobble) % 1000));
          emb += buf;
        } else {
          emb += " 0";
        }
      }
      emb += "\n";
    }
  }
  WriteFileAtomic(out_dir / "embeddings.txt", emb);

  for (const auto& [kind, links] : plan.planted) {
    ExpectedPair p;
    p.kind = kind;
    for (const auto& [a, b] : links) {
      if (std::find(p.left.begin(), p.left.end(), plan.segs[a].id) == p.left.end()) p.left.push_back(plan.segs[a].id);
      if (std::find(p.right.begin(), p.right.end(), plan.segs[b].id) == p.right.end()) p.right.push_back(plan.segs[b].id);
    }
    truth.pairs.push_back(std::move(p));
  }
  for (std::size_t i : plan.decoy_segs) {
    (plan.segs[i].track == 0 ? truth.decoy_left : truth.decoy_right).push_back(plan.segs[i].id);
  }
  for (std::size_t i : plan.unrecognized_segs) truth.unrecognized.push_back(plan.segs[i].id);

  std::string conf = "# synthetic corpus, seed " + std::to_string(spec.seed) + "\n";
  conf += ConfLine("frames.fps", std::to_string(spec.fps));
  for (int track = 0; track < 2; ++track) {
    const std::string key = track == 0 ? "input.d1." : "input.d2.";
    conf += ConfLine(key + "track", names[track]);
    conf += ConfLine(key + "frames", names[track] + "/frames.txt");
    conf += ConfLine(key + "audio", names[track] + "/audio.wav");
    conf += ConfLine(key + "vad", names[track] + "/vad.tsv");
    conf += ConfLine(key + "asr_table", names[track] + "/asr.jsonl");
    conf += ConfLine(key + "language", languages[track]);
  }
  conf += ConfLine("input.mt_table", "mt.jsonl");
  conf += ConfLine("input.embeddings", "embeddings.txt");
  WriteFileAtomic(out_dir / "pipeline.conf", conf);
  WriteFileAtomic(out_dir / "truth.json", TruthToJson(truth).dump(2) + "\n");
  return truth;
}

}  // namespace dubalign

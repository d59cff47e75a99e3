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

#include "dubalign/audio.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace dubalign {
namespace {

std::uint32_t U32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t U16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void Put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void Put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void PutTag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

std::span<const std::int16_t> AudioTrack::Slice(const TimeSpan& span) const {
  const auto begin = static_cast<std::size_t>(span.start_ms()) * kSamplesPerMs;
  const auto end = static_cast<std::size_t>(span.end_ms()) * kSamplesPerMs;
  if (end > samples.size()) {
    Fail(ErrorKind::kValidation, "span [" + std::to_string(span.start_ms()) + ", " +
                                     std::to_string(span.end_ms()) + ") ms lies outside track " +
                                     track.str() + " of " + std::to_string(duration_ms()) + " ms");
  }
  return std::span<const std::int16_t>(samples).subspan(begin, end - begin);
}

AudioTrack ReadWav(const std::filesystem::path& path, TrackId track) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kMissingArtifact, "cannot open audio " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) {
    Fail(ErrorKind::kValidation, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    bad("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  AudioTrack out;
  out.track = std::move(track);
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = U32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) bad("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) bad("short fmt chunk");
      const std::uint16_t format = U16(bytes.data() + body);
      const std::uint16_t channels = U16(bytes.data() + body + 2);
      const std::uint32_t rate = U32(bytes.data() + body + 4);
      const std::uint16_t bits = U16(bytes.data() + body + 14);
      if (format != 1) bad("only PCM WAV is supported");
      if (channels != 1) bad("expected mono, got " + std::to_string(channels) + " channels");
      if (bits != 16) bad("expected 16-bit samples, got " + std::to_string(bits));
      if (rate != kSampleRate) {
        bad("expected 16000 Hz, got " + std::to_string(rate) + " Hz (resample beforehand)");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) bad("data chunk before fmt chunk");
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = static_cast<std::int16_t>(U16(bytes.data() + body + 2 * i));
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  Fail(ErrorKind::kValidation, path.string() + ": no data chunk");
}

std::vector<std::uint8_t> EncodeWav(std::span<const std::int16_t> samples) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  Put32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  Put32(out, 16);
  Put16(out, 1);
  Put16(out, 1);
  Put32(out, kSampleRate);
  Put32(out, kSampleRate * 2);
  Put16(out, 2);
  Put16(out, 16);
  PutTag(out, "data");
  Put32(out, data_bytes);
  for (std::int16_t s : samples) Put16(out, static_cast<std::uint16_t>(s));
  return out;
}

void WriteWav(const std::filesystem::path& path, std::span<const std::int16_t> samples) {
  const auto bytes = EncodeWav(samples);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorKind::kIo, "short write: " + path.string());
}

}  // namespace dubalign

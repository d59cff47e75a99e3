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

#include "dubalign/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "dubalign/core.hpp"

namespace dubalign {
namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

FrameImage ReadY8(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kMissingArtifact, "cannot open frame " + path.string());
  unsigned char header[8];
  in.read(reinterpret_cast<char*>(header), 8);
  if (in.gcount() != 8) Fail(ErrorKind::kValidation, "truncated y8 header: " + path.string());
  const std::uint32_t w = ReadU32(header);
  const std::uint32_t h = ReadU32(header + 4);
  if (w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15) {
    Fail(ErrorKind::kValidation, "implausible y8 dimensions in " + path.string());
  }
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != pixels.size()) {
    Fail(ErrorKind::kValidation, "truncated y8 pixel data: " + path.string());
  }
  return FrameImage(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

FrameImage ReadPng(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    Fail(ErrorKind::kValidation, "cannot read png " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    Fail(ErrorKind::kValidation, "cannot decode png " + path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (!color) return FrameImage(w, h, std::move(buffer));
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = Luma(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
  }
  return FrameImage(w, h, std::move(gray));
}

}  // namespace

FrameImage::FrameImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0 ||
      pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    Fail(ErrorKind::kValidation, "frame pixel count does not match " + std::to_string(width) +
                                     "x" + std::to_string(height));
  }
}

std::uint8_t Luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
}

FrameImage ReadFrame(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".y8") return ReadY8(path);
  if (ext == ".png") return ReadPng(path);
  Fail(ErrorKind::kValidation, "unsupported frame format '" + ext + "': " + path.string());
}

void WriteY8(const std::filesystem::path& path, const FrameImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  PutU32(out, static_cast<std::uint32_t>(image.width()));
  PutU32(out, static_cast<std::uint32_t>(image.height()));
  out.write(reinterpret_cast<const char*>(image.pixels().data()),
            static_cast<std::streamsize>(image.pixels().size()));
  if (!out) Fail(ErrorKind::kIo, "short write: " + path.string());
}

void WritePng(const std::filesystem::path& path, const FrameImage& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels().data(), 0, nullptr)) {
    Fail(ErrorKind::kIo, "cannot write png " + path.string() + ": " + png.message);
  }
}

}  // namespace dubalign

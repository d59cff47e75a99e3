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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dubalign {

// Row-major 8-bit grayscale frame.
class FrameImage {
 public:
  FrameImage() = default;
  FrameImage(int width, int height, std::vector<std::uint8_t> pixels);
  FrameImage(int width, int height, std::uint8_t fill = 0)
      : FrameImage(width, height,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, fill)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  bool operator==(const FrameImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// 0.299 R + 0.587 G + 0.114 B, rounded to the nearest integer.
std::uint8_t Luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Reads `.png` (8-bit gray, gray+alpha, RGB or RGBA; color is reduced to
// luma) or `.y8`. A `.y8` blob is a little-endian uint32 width, uint32
// height, then width*height bytes of row-major intensities.
FrameImage ReadFrame(const std::filesystem::path& path);
void WriteY8(const std::filesystem::path& path, const FrameImage& image);
void WritePng(const std::filesystem::path& path, const FrameImage& image);

}  // namespace dubalign

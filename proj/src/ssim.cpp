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

#include "dubalign/ssim.hpp"

#include <string>

#include "dubalign/core.hpp"

namespace dubalign {
namespace {

constexpr std::int64_t kN = kSsimWindow * kSsimWindow;
constexpr double kC1Scaled = kSsimC1 * kN * kN;
constexpr double kC2Scaled = kSsimC2 * kN * (kN - 1);

// 7x7 box sums of `values` (row-major, width w, height h) over every window
// that fits. Output is (w-6) x (h-6), row-major.
template <typename T>
std::vector<std::int32_t> BoxSums(const T* values, int w, int h) {
  const int wx = w - kSsimWindow + 1;
  const int wy = h - kSsimWindow + 1;
  std::vector<std::int32_t> rows(static_cast<std::size_t>(wx) * h);
  for (int y = 0; y < h; ++y) {
    const T* src = values + static_cast<std::size_t>(y) * w;
    std::int32_t* dst = rows.data() + static_cast<std::size_t>(y) * wx;
    std::int32_t acc = 0;
    for (int k = 0; k < kSsimWindow; ++k) acc += static_cast<std::int32_t>(src[k]);
    dst[0] = acc;
    for (int x = 1; x < wx; ++x) {
      acc += static_cast<std::int32_t>(src[x + kSsimWindow - 1]) - static_cast<std::int32_t>(src[x - 1]);
      dst[x] = acc;
    }
  }
  std::vector<std::int32_t> out(static_cast<std::size_t>(wx) * wy);
  for (int x = 0; x < wx; ++x) {
    std::int32_t acc = 0;
    for (int k = 0; k < kSsimWindow; ++k) acc += rows[static_cast<std::size_t>(k) * wx + x];
    out[x] = acc;
    for (int y = 1; y < wy; ++y) {
      acc += rows[static_cast<std::size_t>(y + kSsimWindow - 1) * wx + x] -
             rows[static_cast<std::size_t>(y - 1) * wx + x];
      out[static_cast<std::size_t>(y) * wx + x] = acc;
    }
  }
  return out;
}

void CheckFits(const FrameImage& img) {
  if (img.width() < 8 || img.height() < 8) {
    Fail(ErrorKind::kValidation, "frame " + std::to_string(img.width()) + "x" +
                                     std::to_string(img.height()) +
                                     " is smaller than the 8x8 minimum for the SSIM window");
  }
}

}  // namespace

PreparedFrame::PreparedFrame(FrameImage image) : image_(std::move(image)) {
  CheckFits(image_);
  const auto px = image_.pixels();
  std::vector<std::int32_t> squares(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) squares[i] = static_cast<std::int32_t>(px[i]) * px[i];
  sum_ = BoxSums(px.data(), image_.width(), image_.height());
  sum_sq_ = BoxSums(squares.data(), image_.width(), image_.height());
}

double Ssim(const PreparedFrame& a, const PreparedFrame& b) {
  if (a.image_.width() != b.image_.width() || a.image_.height() != b.image_.height()) {
    Fail(ErrorKind::kValidation, "SSIM dimension mismatch: " + std::to_string(a.image_.width()) +
                                     "x" + std::to_string(a.image_.height()) + " vs " +
                                     std::to_string(b.image_.width()) + "x" +
                                     std::to_string(b.image_.height()));
  }
  const auto pa = a.image_.pixels();
  const auto pb = b.image_.pixels();
  std::vector<std::int32_t> products(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) products[i] = static_cast<std::int32_t>(pa[i]) * pb[i];
  const auto cross = BoxSums(products.data(), a.image_.width(), a.image_.height());

  // All moment numerators are exact integers; only the final ratio rounds.
  double total = 0.0;
  for (std::size_t i = 0; i < cross.size(); ++i) {
    const std::int64_t sx = a.sum_[i];
    const std::int64_t sy = b.sum_[i];
    const std::int64_t var_x = kN * a.sum_sq_[i] - sx * sx;
    const std::int64_t var_y = kN * b.sum_sq_[i] - sy * sy;
    const std::int64_t cov = kN * cross[i] - sx * sy;
    const double luminance_num = static_cast<double>(2 * sx * sy) + kC1Scaled;
    const double luminance_den = static_cast<double>(sx * sx + sy * sy) + kC1Scaled;
    const double structure_num = static_cast<double>(2 * cov) + kC2Scaled;
    const double structure_den = static_cast<double>(var_x + var_y) + kC2Scaled;
    total += (luminance_num * structure_num) / (luminance_den * structure_den);
  }
  return total / static_cast<double>(cross.size());
}

double Ssim(const FrameImage& a, const FrameImage& b) {
  CheckFits(a);
  CheckFits(b);
  if (a.width() != b.width() || a.height() != b.height()) {
    Fail(ErrorKind::kValidation, "SSIM dimension mismatch: " + std::to_string(a.width()) + "x" +
                                     std::to_string(a.height()) + " vs " +
                                     std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  return Ssim(PreparedFrame(a), PreparedFrame(b));
}

}  // namespace dubalign

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
#include <vector>

#include "dubalign/image.hpp"

namespace dubalign {

inline constexpr int kSsimWindow = 7;
inline constexpr double kSsimDynamicRange = 255.0;
inline constexpr double kSsimC1 = (0.01 * kSsimDynamicRange) * (0.01 * kSsimDynamicRange);
inline constexpr double kSsimC2 = (0.03 * kSsimDynamicRange) * (0.03 * kSsimDynamicRange);

// Per-frame window sums reused across every comparison involving the frame.
// Frame-alignment compares each frame against hundreds of candidates, so the
// first- and second-moment box sums are computed once here.
class PreparedFrame {
 public:
  explicit PreparedFrame(FrameImage image);

  const FrameImage& image() const noexcept { return image_; }
  int windows_x() const noexcept { return image_.width() - kSsimWindow + 1; }
  int windows_y() const noexcept { return image_.height() - kSsimWindow + 1; }

 private:
  friend double Ssim(const PreparedFrame& a, const PreparedFrame& b);

  FrameImage image_;
  std::vector<std::int32_t> sum_;     // sum of x over each 7x7 window
  std::vector<std::int32_t> sum_sq_;  // sum of x^2 over each 7x7 window
};

// Mean structural similarity over all 7x7 windows that fit inside the frame
// (uniform window, sample covariance, K1 = 0.01, K2 = 0.03, L = 255).
// Symmetric; exactly 1.0 for identical frames.
double Ssim(const PreparedFrame& a, const PreparedFrame& b);
double Ssim(const FrameImage& a, const FrameImage& b);

}  // namespace dubalign

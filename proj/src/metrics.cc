/*
 * Copyright 2026 The RPRR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rprr/metrics.h"

#include <cmath>

#include "rprr/errors.h"

namespace rprr {

namespace {

double PsnrOver(const ColorImage& reference, const ColorImage& test,
                std::span<const std::uint8_t> mask) {
  if (reference.width() != test.width() || reference.height() != test.height()) {
    throw ValidationError("PSNR needs images of equal size");
  }
  const std::size_t pixels = static_cast<std::size_t>(reference.width()) * reference.height();
  if (!mask.empty() && mask.size() != pixels) {
    throw ValidationError("PSNR mask does not match the image size");
  }
  const auto& a = reference.samples();
  const auto& b = test.samples();
  double sse = 0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!mask.empty() && mask[p] == 0) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = double(a[3 * p + c]) - double(b[3 * p + c]);
      sse += d * d;
    }
    n += 3;
  }
  if (n == 0) throw ValidationError("PSNR over no pixels");
  if (sse == 0) return kInfinitePsnr;
  return 10.0 * std::log10(255.0 * 255.0 / (sse / static_cast<double>(n)));
}

}  // namespace

double Psnr(const ColorImage& reference, const ColorImage& test) {
  return PsnrOver(reference, test, {});
}

double Psnr(const ColorImage& reference, const ColorImage& test,
            std::span<const std::uint8_t> mask) {
  if (mask.empty()) throw ValidationError("PSNR mask is empty");
  return PsnrOver(reference, test, mask);
}

double BitsPerPixel(std::uint64_t bytes, int width, int height) {
  if (width <= 0 || height <= 0) throw ValidationError("bpp needs a positive image size");
  return 8.0 * static_cast<double>(bytes) / (static_cast<double>(width) * height);
}

void EnergyModel::Validate() const {
  if (!(volts > 0 && pose_amps > 0 && encode_amps > 0 && send_amps > 0)) {
    throw ValidationError("energy model values must be positive");
  }
}

const char* SchemeName(Scheme s) {
  return s == Scheme::kRprr ? "rprr" : "independent";
}

double EnergyEstimate(const StageTimings& t, Scheme scheme, const EnergyModel& m) {
  m.Validate();
  if (t.pose_s < 0 || t.encode_s < 0 || t.send_s < 0) {
    throw ValidationError("stage timings must be non-negative");
  }
  double e = m.volts * m.encode_amps * t.encode_s + m.volts * m.send_amps * t.send_s;
  if (scheme == Scheme::kRprr) e += m.volts * m.pose_amps * t.pose_s;
  return e;
}

}  // namespace rprr

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

#ifndef RPRR_METRICS_H_
#define RPRR_METRICS_H_

#include <cstdint>
#include <limits>
#include <span>

#include "rprr/geometry.h"

namespace rprr {

// Returned by Psnr for identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

// Over all three channels. Throws ValidationError on a size mismatch.
double Psnr(const ColorImage& reference, const ColorImage& test);
// Only pixels whose mask byte is nonzero.
double Psnr(const ColorImage& reference, const ColorImage& test,
            std::span<const std::uint8_t> mask);

double BitsPerPixel(std::uint64_t bytes, int width, int height);

// Supply voltage and the currents drawn while computing the pose, encoding
// and sending.
struct EnergyModel {
  double volts = 15.0;
  double pose_amps = 0.06;
  double encode_amps = 0.06;
  double send_amps = 0.12;

  void Validate() const;
};

struct StageTimings {
  double pose_s = 0;
  double encode_s = 0;
  double send_s = 0;
};

enum class Scheme { kRprr, kIndependent };

const char* SchemeName(Scheme s);

// Joules. The independent scheme has no pose stage. Throws ValidationError
// for negative timings.
double EnergyEstimate(const StageTimings& t, Scheme scheme,
                      const EnergyModel& m = {});

}  // namespace rprr

#endif  // RPRR_METRICS_H_

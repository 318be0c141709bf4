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

// Loading two-frame scene pairs from disk.
//
// tum: a TUM RGB-D sequence directory (rgb.txt, depth.txt, optional
// groundtruth.txt and intrinsics.txt). Color and depth frames are associated
// by nearest timestamp; the ground-truth pose comes from the trajectory,
// interpolated at the depth timestamps.
//
// raw: a directory with intrinsics.txt, depth_a.pgm, color_a.ppm,
// depth_b.pgm and color_b.ppm.

#ifndef RPRR_DATASET_H_
#define RPRR_DATASET_H_

#include <string>
#include <vector>

#include "rprr/geometry.h"
#include "rprr/scene.h"

namespace rprr {

enum class DatasetFormat { kTum, kRaw };

// Parses "tum" or "raw". Throws ValidationError.
DatasetFormat ParseDatasetFormat(const std::string& name);

struct TimedFile {
  double stamp = 0.0;
  std::string file;
};

// "timestamp filename" lines; '#' starts a comment. Throws IngestionError.
std::vector<TimedFile> ReadTimedFileList(const std::string& path);

struct Association {
  double rgb_stamp = 0.0;
  std::string rgb;
  double depth_stamp = 0.0;
  std::string depth;
};

// Greedy closest-first matching, each entry used at most once; result sorted
// by color timestamp.
std::vector<Association> AssociateFrames(const std::vector<TimedFile>& rgb,
                                         const std::vector<TimedFile>& depth,
                                         double max_difference_s = 0.02);

struct TrajectorySample {
  double stamp = 0.0;
  // World-from-camera.
  RigidTransform pose;
};

class Trajectory {
 public:
  // Samples must have strictly increasing timestamps. Throws ValidationError.
  explicit Trajectory(std::vector<TrajectorySample> samples);

  // "timestamp tx ty tz qx qy qz qw" lines. Throws IngestionError.
  static Trajectory Read(const std::string& path);

  // Linear in translation, spherical in rotation. Throws ValidationError
  // outside the sampled time range.
  RigidTransform At(double stamp) const;

  const std::vector<TrajectorySample>& samples() const { return samples_; }

 private:
  std::vector<TrajectorySample> samples_;
};

// Maps points of the camera at `world_from_a` into the camera at
// `world_from_b`.
RigidTransform RelativePose(const RigidTransform& world_from_a,
                            const RigidTransform& world_from_b);

// Intrinsics of the TUM freiburg sequences with the default calibration.
Intrinsics TumDefaultIntrinsics();

struct LoadOptions {
  // Index of frame a in the association list (tum only).
  int first = 0;
  // Frame b is `first + gap` (tum only).
  int gap = 10;
  double max_difference_s = 0.02;
};

// Throws IngestionError naming the offending file.
ScenePair LoadScenePair(const std::string& path, DatasetFormat format,
                        const LoadOptions& options = {});

// Writes `pair` in the raw layout (ground truth, if any, is not stored).
void SaveRawScenePair(const std::string& dir, const ScenePair& pair);

}  // namespace rprr

#endif  // RPRR_DATASET_H_

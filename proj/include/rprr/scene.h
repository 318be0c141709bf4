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

#ifndef RPRR_SCENE_H_
#define RPRR_SCENE_H_

#include <optional>
#include <string>

#include "rprr/geometry.h"

namespace rprr {

// Registered depth/color frames from two sensors sharing one camera model.
struct ScenePair {
  DepthImage z_a;
  ColorImage c_a;
  DepthImage z_b;
  ColorImage c_b;
  Intrinsics intrinsics;
  // Maps points from sensor a's frame into sensor b's frame.
  std::optional<RigidTransform> ground_truth;
  std::string provenance;  // "dataset" or "synthetic"

  // Throws ValidationError when image sizes disagree with the intrinsics.
  void Validate() const;
};

}  // namespace rprr

#endif  // RPRR_SCENE_H_

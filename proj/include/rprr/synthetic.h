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

// Analytic ray caster producing ground-truth RGB-D pairs from textured planes,
// boxes and cylinders. Depth is the z coordinate in the camera frame, color a
// smooth procedural texture of the world point (view independent, i.e.
// uniform illumination).

#ifndef RPRR_SYNTHETIC_H_
#define RPRR_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rprr/geometry.h"
#include "rprr/scene.h"

namespace rprr {

struct Texture {
  Rgb base{128, 128, 128};
  Rgb accent{200, 200, 200};
  double period = 0.4;  // meters
};

struct Primitive {
  enum class Kind { kRectangle, kBox, kCylinder };
  Kind kind = Kind::kRectangle;
  // Rectangle: center, in-plane unit axes and half extents along them.
  // Box: center, orientation (columns are the box axes) and half extents.
  // Cylinder: base center, unit axis (axis_u), radius and height.
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_v = Eigen::Vector3d::UnitY();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d half_extent = Eigen::Vector3d::Ones();
  double radius = 0.2;
  double height = 1.0;
  Texture texture;

  static Primitive Rectangle(const Eigen::Vector3d& center,
                             const Eigen::Vector3d& axis_u,
                             const Eigen::Vector3d& axis_v, double half_u,
                             double half_v, const Texture& texture);
  static Primitive Box(const Eigen::Vector3d& center,
                       const Eigen::Vector3d& half_extent, double yaw,
                       const Texture& texture);
  static Primitive Cylinder(const Eigen::Vector3d& base,
                            const Eigen::Vector3d& axis, double radius,
                            double height, const Texture& texture);
};

struct SyntheticSceneSpec {
  std::string name = "scene";
  std::vector<Primitive> primitives;
  // World-from-camera poses.
  RigidTransform camera_a;
  RigidTransform camera_b;
  Intrinsics intrinsics;
  double noise_mm = 0.0;

  // Throws ValidationError.
  void Validate() const;
};

struct RenderedView {
  DepthImage depth;
  ColorImage color;
};

// Renders one camera. `seed` only drives depth noise.
RenderedView RenderView(const SyntheticSceneSpec& spec,
                        const RigidTransform& world_from_camera,
                        std::uint64_t seed);

// Both views plus the exact M_ab. Throws GenerationError when a camera sees
// no primitive.
ScenePair GenerateSyntheticScene(const SyntheticSceneSpec& spec,
                                 std::uint64_t seed);

// Camera pose from yaw (about y), pitch (about x), roll (about z) in radians
// and a position.
RigidTransform CameraPose(double yaw, double pitch, double roll,
                          const Eigen::Vector3d& position);

// Single fronto-parallel rectangle at `distance_m`, both cameras at the
// origin.
SyntheticSceneSpec PlaneSceneSpec(const Intrinsics& k, double distance_m);

// Room corner with floor, two walls, boxes and a cylinder. Camera b is the
// camera a pose composed with `b_from_a_motion` (in camera a's frame).
SyntheticSceneSpec RoomSceneSpec(const Intrinsics& k,
                                 const RigidTransform& camera_b_in_a);

// Background wall with a cylinder that only sensor b can see.
SyntheticSceneSpec OcclusionSceneSpec(const Intrinsics& k);

// Cases of the pose-recovery suite: rotations up to 15 degrees, translations
// up to 0.3 m, drawn deterministically from `seed`.
std::vector<SyntheticSceneSpec> PoseSuiteSpecs(const Intrinsics& k, int count,
                                               std::uint64_t seed);

// Six two-view scenes with substantial overlap, for experiments.
std::vector<SyntheticSceneSpec> StandardSceneSpecs(const Intrinsics& k);

// Fraction of sensor b's valid pixels that are also visible to sensor a
// (ray-cast check with a depth tolerance).
double FieldOfViewOverlap(const SyntheticSceneSpec& spec);

}  // namespace rprr

#endif  // RPRR_SYNTHETIC_H_

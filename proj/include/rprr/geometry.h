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

// Pinhole camera model, depth/color rasters and the SE(3) algebra used to
// move pixels between two sensor frames.
//
// Axis convention: x to the right, y down, z forward along the optical axis.
// Pixel column index is `i`, row index is `j`. Depth samples are stored as
// 16-bit integers (millimeters times `Intrinsics::depth_scale`); all geometry
// is computed in meters.

#ifndef RPRR_GEOMETRY_H_
#define RPRR_GEOMETRY_H_

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace rprr {

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct Intrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double ic = 320.0;
  double jc = 240.0;
  int width = 640;
  int height = 480;
  // Millimeters per stored depth unit.
  double depth_scale = 1.0;

  // VGA fixture (fx = fy = 525, principal point at the image center).
  static Intrinsics Vga();
  // The VGA fixture rescaled to `width` x `height`.
  static Intrinsics ScaledVga(int width, int height);
  // Camera model of the grid that keeps every `factor`-th pixel in each
  // direction, starting at pixel 0.
  Intrinsics Decimated(int factor) const;

  // Throws ValidationError when the invariants do not hold.
  void Validate() const;

  // FNV-1a over the binary field values; pins both ends of a session to the
  // same camera model.
  std::uint64_t Hash() const;

  int pixel_count() const { return width * height; }

  double ToMillimeters(std::uint16_t raw) const { return raw * depth_scale; }
  // Rounds to the nearest stored unit; returns 0 (invalid) when the value
  // does not fit in 16 bits or rounds to zero.
  std::uint16_t FromMillimeters(double mm) const;
};

class DepthImage {
 public:
  DepthImage() = default;
  // Zero-filled (all invalid).
  DepthImage(int width, int height);
  DepthImage(int width, int height, std::vector<std::uint16_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  std::uint16_t at(int i, int j) const { return samples_[Index(i, j)]; }
  std::uint16_t& at(int i, int j) { return samples_[Index(i, j)]; }
  bool valid(int i, int j) const { return at(i, j) != 0; }
  bool contains(int i, int j) const {
    return i >= 0 && j >= 0 && i < width_ && j < height_;
  }
  std::size_t valid_count() const;

  const std::vector<std::uint16_t>& samples() const { return samples_; }

  bool operator==(const DepthImage&) const = default;

 private:
  std::size_t Index(int i, int j) const {
    return static_cast<std::size_t>(j) * width_ + i;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint16_t> samples_;
};

// Keeps every `factor`-th sample in each direction, starting at (0, 0).
DepthImage Decimate(const DepthImage& z, int factor);

using Rgb = std::array<std::uint8_t, 3>;

class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int width, int height);
  ColorImage(int width, int height, std::vector<std::uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  Rgb at(int i, int j) const {
    const std::size_t k = Index(i, j);
    return {samples_[k], samples_[k + 1], samples_[k + 2]};
  }
  void set(int i, int j, const Rgb& c) {
    const std::size_t k = Index(i, j);
    samples_[k] = c[0];
    samples_[k + 1] = c[1];
    samples_[k + 2] = c[2];
  }
  bool contains(int i, int j) const {
    return i >= 0 && j >= 0 && i < width_ && j < height_;
  }

  const std::vector<std::uint8_t>& samples() const { return samples_; }

  bool operator==(const ColorImage&) const = default;

 private:
  std::size_t Index(int i, int j) const {
    return 3 * (static_cast<std::size_t>(j) * width_ + i);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> samples_;
};

// Element of SE(3). Maps points expressed in one camera frame into another:
// x' = R x + t.
class RigidTransform {
 public:
  RigidTransform();
  // Throws ValidationError unless R is a proper rotation within 1e-9.
  RigidTransform(const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& translation);

  static RigidTransform Identity() { return RigidTransform(); }
  static RigidTransform FromMatrix(const Eigen::Matrix4d& m);
  static RigidTransform Translation(const Eigen::Vector3d& t);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  RigidTransform inverse() const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return rotation_ * x + translation_;
  }
  RigidTransform operator*(const RigidTransform& other) const;

  // Rotation angle in radians, in [0, pi].
  double angle() const;

  bool operator==(const RigidTransform& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  struct Unchecked {};
  RigidTransform(const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& translation, Unchecked);

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

// (u, v, 1, q) with u, v normalized image coordinates and q = 1/z in 1/m.
struct InverseDepthPoint {
  double u = 0.0;
  double v = 0.0;
  double q = 0.0;

  Eigen::Vector3d euclidean() const { return {u / q, v / q, 1.0 / q}; }
  Eigen::Vector3d vector() const { return {u, v, q}; }
  // Throws BehindCameraError when x.z() <= 0.
  static InverseDepthPoint FromEuclidean(const Eigen::Vector3d& x);
};

// Six twist coordinates: alpha1..alpha3 translate along x, y, z (meters);
// alpha4..alpha6 rotate about x, y, z (radians).
class MotionVector {
 public:
  MotionVector() : alpha_(Vector6d::Zero()) {}
  // Throws ValidationError on non-finite components.
  explicit MotionVector(const Vector6d& alpha);

  const Vector6d& alpha() const { return alpha_; }
  double operator[](int k) const { return alpha_[k]; }
  double norm() const { return alpha_.norm(); }

 private:
  Vector6d alpha_;
};

// Sub-pixel position plus depth in meters.
struct PixelDepth {
  double i = 0.0;
  double j = 0.0;
  double z = 0.0;
};

// Throws InvalidDepthError when z_mm <= 0.
InverseDepthPoint PixelToUvq(double i, double j, double z_mm,
                             const Intrinsics& intrinsics);

// Throws BehindCameraError when p.q <= 0.
PixelDepth UvqToPixel(const InverseDepthPoint& p,
                      const Intrinsics& intrinsics);

// The group generators G1..G6 (translations along x, y, z; rotations about
// x, y, z).
const std::array<Eigen::Matrix4d, 6>& Se3Generators();

// exp(sum_k alpha_k G_k), closed form.
RigidTransform Se3Exp(const MotionVector& b);

RigidTransform Se3Invert(const RigidTransform& m);

// Applies m to a point in inverse depth coordinates and renormalizes the
// third homogeneous component to 1. Throws BehindCameraError when the
// transformed depth is not positive.
InverseDepthPoint Se3ApplyUvq(const RigidTransform& m,
                              const InverseDepthPoint& p);

Eigen::Matrix3d Skew(const Eigen::Vector3d& w);

}  // namespace rprr

#endif  // RPRR_GEOMETRY_H_

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

#include "rprr/geometry.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <Eigen/Dense>

#include "rprr/errors.h"

namespace rprr {

namespace {

constexpr double kOrthonormalTolerance = 1e-9;

template <typename T>
void HashBytes(std::uint64_t& h, const T& value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

Intrinsics Intrinsics::Vga() { return Intrinsics{}; }

Intrinsics Intrinsics::ScaledVga(int width, int height) {
  Intrinsics k;
  const double sx = width / 640.0;
  const double sy = height / 480.0;
  k.fx *= sx;
  k.fy *= sy;
  k.ic *= sx;
  k.jc *= sy;
  k.width = width;
  k.height = height;
  return k;
}

Intrinsics Intrinsics::Decimated(int factor) const {
  if (factor < 1) throw ValidationError("decimation factor must be positive");
  Intrinsics k = *this;
  k.fx /= factor;
  k.fy /= factor;
  k.ic /= factor;
  k.jc /= factor;
  k.width = (width + factor - 1) / factor;
  k.height = (height + factor - 1) / factor;
  return k;
}

void Intrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ValidationError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ValidationError("intrinsics: image size must be positive");
  }
  if (!(ic >= 0.0 && ic < width) || !(jc >= 0.0 && jc < height)) {
    throw ValidationError("intrinsics: principal point outside the image");
  }
  if (!(depth_scale > 0.0)) {
    throw ValidationError("intrinsics: depth_scale must be positive");
  }
}

std::uint64_t Intrinsics::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  HashBytes(h, fx);
  HashBytes(h, fy);
  HashBytes(h, ic);
  HashBytes(h, jc);
  HashBytes(h, static_cast<std::int32_t>(width));
  HashBytes(h, static_cast<std::int32_t>(height));
  HashBytes(h, depth_scale);
  return h;
}

std::uint16_t Intrinsics::FromMillimeters(double mm) const {
  const double raw = std::round(mm / depth_scale);
  if (!(raw >= 1.0) || raw > 65535.0) return 0;
  return static_cast<std::uint16_t>(raw);
}

DepthImage::DepthImage(int width, int height)
    : width_(width),
      height_(height),
      samples_(static_cast<std::size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("depth image: size must be positive");
  }
}

DepthImage::DepthImage(int width, int height, std::vector<std::uint16_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width <= 0 || height <= 0 ||
      samples_.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("depth image: sample count does not match size");
  }
}

std::size_t DepthImage::valid_count() const {
  std::size_t n = 0;
  for (std::uint16_t s : samples_) n += (s != 0);
  return n;
}

ColorImage::ColorImage(int width, int height)
    : width_(width),
      height_(height),
      samples_(3 * static_cast<std::size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("color image: size must be positive");
  }
}

ColorImage::ColorImage(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width <= 0 || height <= 0 ||
      samples_.size() != 3 * static_cast<std::size_t>(width) * height) {
    throw ValidationError("color image: sample count does not match size");
  }
}

RigidTransform::RigidTransform()
    : rotation_(Eigen::Matrix3d::Identity()),
      translation_(Eigen::Vector3d::Zero()) {}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError("rigid transform: non-finite entries");
  }
  const Eigen::Matrix3d rtr = rotation.transpose() * rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
          kOrthonormalTolerance ||
      std::abs(rotation.determinant() - 1.0) > kOrthonormalTolerance) {
    throw ValidationError("rigid transform: rotation is not orthonormal");
  }
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& translation, Unchecked)
    : rotation_(rotation), translation_(translation) {}

RigidTransform RigidTransform::FromMatrix(const Eigen::Matrix4d& m) {
  if (m.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) {
    throw ValidationError("rigid transform: bottom row must be [0 0 0 1]");
  }
  return RigidTransform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

RigidTransform RigidTransform::Translation(const Eigen::Vector3d& t) {
  return RigidTransform(Eigen::Matrix3d::Identity(), t);
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_), Unchecked{});
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return RigidTransform(rotation_ * other.rotation_,
                        rotation_ * other.translation_ + translation_,
                        Unchecked{});
}

double RigidTransform::angle() const {
  const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near 0; use the skew part there.
  const Eigen::Vector3d w(rotation_(2, 1) - rotation_(1, 2),
                          rotation_(0, 2) - rotation_(2, 0),
                          rotation_(1, 0) - rotation_(0, 1));
  return std::atan2(0.5 * w.norm(), c);
}

InverseDepthPoint InverseDepthPoint::FromEuclidean(const Eigen::Vector3d& x) {
  if (!(x.z() > 0.0)) {
    throw BehindCameraError("point is not in front of the camera");
  }
  return {x.x() / x.z(), x.y() / x.z(), 1.0 / x.z()};
}

MotionVector::MotionVector(const Vector6d& alpha) : alpha_(alpha) {
  if (!alpha.allFinite()) {
    throw ValidationError("motion vector: non-finite component");
  }
}

InverseDepthPoint PixelToUvq(double i, double j, double z_mm,
                             const Intrinsics& intrinsics) {
  if (!(z_mm > 0.0)) {
    throw InvalidDepthError("pixel (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") has no valid depth");
  }
  return {(i - intrinsics.ic) / intrinsics.fx,
          (j - intrinsics.jc) / intrinsics.fy, 1000.0 / z_mm};
}

PixelDepth UvqToPixel(const InverseDepthPoint& p,
                      const Intrinsics& intrinsics) {
  if (!(p.q > 0.0)) {
    throw BehindCameraError("inverse depth must be positive");
  }
  return {p.u * intrinsics.fx + intrinsics.ic,
          p.v * intrinsics.fy + intrinsics.jc, 1.0 / p.q};
}

const std::array<Eigen::Matrix4d, 6>& Se3Generators() {
  static const std::array<Eigen::Matrix4d, 6> generators = [] {
    std::array<Eigen::Matrix4d, 6> g;
    for (auto& m : g) m.setZero();
    g[0](0, 3) = 1.0;
    g[1](1, 3) = 1.0;
    g[2](2, 3) = 1.0;
    g[3](1, 2) = -1.0;
    g[3](2, 1) = 1.0;
    g[4](0, 2) = 1.0;
    g[4](2, 0) = -1.0;
    g[5](0, 1) = -1.0;
    g[5](1, 0) = 1.0;
    return g;
  }();
  return generators;
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0.0, -w.z(), w.y(),  //
      w.z(), 0.0, -w.x(),   //
      -w.y(), w.x(), 0.0;
  return s;
}

RigidTransform Se3Exp(const MotionVector& b) {
  const Eigen::Vector3d v = b.alpha().head<3>();
  const Eigen::Vector3d w = b.alpha().tail<3>();
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);

  // A = sin(t)/t, B = (1 - cos(t))/t^2, C = (t - sin(t))/t^3.
  double a, bb, c;
  if (theta2 < 1e-8) {
    a = 1.0 - theta2 / 6.0;
    bb = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    bb = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Eigen::Matrix3d wx = Skew(w);
  const Eigen::Matrix3d wx2 = wx * wx;
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + a * wx + bb * wx2;
  const Eigen::Matrix3d left_jacobian =
      Eigen::Matrix3d::Identity() + bb * wx + c * wx2;
  return RigidTransform(r, left_jacobian * v);
}

RigidTransform Se3Invert(const RigidTransform& m) { return m.inverse(); }

InverseDepthPoint Se3ApplyUvq(const RigidTransform& m,
                              const InverseDepthPoint& p) {
  if (!(p.q > 0.0)) {
    throw BehindCameraError("inverse depth must be positive");
  }
  const Eigen::Vector3d x =
      m.rotation() * Eigen::Vector3d(p.u, p.v, 1.0) + m.translation() * p.q;
  if (!(x.z() > 0.0)) {
    throw BehindCameraError("warped point lies behind the camera");
  }
  return {x.x() / x.z(), x.y() / x.z(), p.q / x.z()};
}

DepthImage Decimate(const DepthImage& z, int factor) {
  if (factor < 1) throw ValidationError("decimation factor must be positive");
  if (factor == 1) return z;
  DepthImage out((z.width() + factor - 1) / factor,
                 (z.height() + factor - 1) / factor);
  for (int j = 0; j < out.height(); ++j) {
    for (int i = 0; i < out.width(); ++i) out.at(i, j) = z.at(i * factor, j * factor);
  }
  return out;
}

}  // namespace rprr

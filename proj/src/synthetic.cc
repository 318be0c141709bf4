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

#include "rprr/synthetic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Geometry>

#include "rprr/errors.h"

namespace rprr {

namespace {

constexpr double kNear = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hit {
  double t = kInf;
  const Primitive* primitive = nullptr;
};

double IntersectRectangle(const Primitive& p, const Eigen::Vector3d& o,
                          const Eigen::Vector3d& d) {
  const Eigen::Vector3d n = p.axis_u.cross(p.axis_v);
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-12) return kInf;
  const double t = n.dot(p.center - o) / denom;
  if (t <= kNear) return kInf;
  const Eigen::Vector3d rel = o + t * d - p.center;
  if (std::abs(rel.dot(p.axis_u)) > p.half_extent.x() ||
      std::abs(rel.dot(p.axis_v)) > p.half_extent.y()) {
    return kInf;
  }
  return t;
}

double IntersectBox(const Primitive& p, const Eigen::Vector3d& o,
                    const Eigen::Vector3d& d) {
  const Eigen::Vector3d lo = p.orientation.transpose() * (o - p.center);
  const Eigen::Vector3d ld = p.orientation.transpose() * d;
  double t0 = -kInf, t1 = kInf;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(ld[a]) < 1e-15) {
      if (std::abs(lo[a]) > p.half_extent[a]) return kInf;
      continue;
    }
    double ta = (-p.half_extent[a] - lo[a]) / ld[a];
    double tb = (p.half_extent[a] - lo[a]) / ld[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return kInf;
  }
  if (t0 > kNear) return t0;
  return kInf;  // camera inside the box
}

double IntersectCylinder(const Primitive& p, const Eigen::Vector3d& o,
                         const Eigen::Vector3d& d) {
  const Eigen::Vector3d& a = p.axis_u;
  const Eigen::Vector3d w = o - p.center;
  const Eigen::Vector3d dp = d - d.dot(a) * a;
  const Eigen::Vector3d wp = w - w.dot(a) * a;
  double best = kInf;
  const double qa = dp.squaredNorm();
  if (qa > 1e-15) {
    const double qb = 2.0 * dp.dot(wp);
    const double qc = wp.squaredNorm() - p.radius * p.radius;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double t : {(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)}) {
        if (t <= kNear) continue;
        const double h = (w + t * d).dot(a);
        if (h >= 0.0 && h <= p.height) {
          best = std::min(best, t);
          break;
        }
      }
    }
  }
  // End caps.
  const double da = d.dot(a);
  if (std::abs(da) > 1e-15) {
    for (double h : {0.0, p.height}) {
      const double t = (h - w.dot(a)) / da;
      if (t <= kNear || t >= best) continue;
      const Eigen::Vector3d r = w + t * d - h * a;
      if (r.squaredNorm() <= p.radius * p.radius) best = t;
    }
  }
  return best;
}

Hit CastRay(const std::vector<Primitive>& primitives, const Eigen::Vector3d& o,
            const Eigen::Vector3d& d) {
  Hit hit;
  for (const Primitive& p : primitives) {
    double t = kInf;
    switch (p.kind) {
      case Primitive::Kind::kRectangle:
        t = IntersectRectangle(p, o, d);
        break;
      case Primitive::Kind::kBox:
        t = IntersectBox(p, o, d);
        break;
      case Primitive::Kind::kCylinder:
        t = IntersectCylinder(p, o, d);
        break;
    }
    if (t < hit.t) {
      hit.t = t;
      hit.primitive = &p;
    }
  }
  return hit;
}

Rgb Shade(const Texture& tex, const Eigen::Vector3d& x) {
  const double k = 2.0 * M_PI / tex.period;
  const double m = 0.5 + 0.25 * std::sin(k * (x.x() + 0.7 * x.z())) +
                   0.25 * std::sin(1.3 * k * (x.y() - 0.4 * x.x() + 0.3 * x.z()));
  Rgb c;
  for (int ch = 0; ch < 3; ++ch) {
    const double v = tex.base[ch] * (1.0 - m) + tex.accent[ch] * m;
    c[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return c;
}

Texture Tex(Rgb base, Rgb accent, double period) {
  return Texture{base, accent, period};
}

void AddRoom(std::vector<Primitive>& p) {
  const Eigen::Vector3d ex = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d ey = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d ez = Eigen::Vector3d::UnitZ();
  // Floor (y down, so the floor sits at positive y), walls and ceiling.
  p.push_back(Primitive::Rectangle({0.0, 1.0, 2.5}, ex, ez, 3.0, 3.5,
                                   Tex({90, 70, 50}, {170, 140, 100}, 0.6)));
  p.push_back(Primitive::Rectangle({0.0, -0.25, 4.0}, ex, ey, 3.0, 1.5,
                                   Tex({60, 90, 140}, {180, 200, 230}, 0.8)));
  p.push_back(Primitive::Rectangle({-2.0, -0.25, 2.5}, ez, ey, 3.5, 1.5,
                                   Tex({150, 60, 60}, {230, 180, 160}, 0.7)));
  p.push_back(Primitive::Rectangle({2.2, -0.25, 2.5}, ez, ey, 3.5, 1.5,
                                   Tex({60, 130, 70}, {190, 230, 170}, 0.7)));
  p.push_back(Primitive::Rectangle({0.0, -1.5, 2.5}, ex, ez, 3.0, 3.5,
                                   Tex({200, 200, 190}, {240, 240, 235}, 1.0)));
}

void AddFurniture(std::vector<Primitive>& p) {
  p.push_back(Primitive::Box({-0.6, 0.75, 2.2}, {0.3, 0.25, 0.3}, 0.3,
                             Tex({200, 120, 40}, {250, 210, 120}, 0.3)));
  p.push_back(Primitive::Box({0.75, 0.6, 2.8}, {0.25, 0.4, 0.25}, -0.4,
                             Tex({40, 100, 180}, {140, 190, 240}, 0.3)));
  p.push_back(Primitive::Cylinder({0.1, 1.0, 1.9}, -Eigen::Vector3d::UnitY(),
                                  0.15, 0.9,
                                  Tex({170, 40, 140}, {240, 160, 220}, 0.25)));
}

}  // namespace

void ScenePair::Validate() const {
  intrinsics.Validate();
  const int w = intrinsics.width, h = intrinsics.height;
  if (z_a.width() != w || z_a.height() != h || z_b.width() != w ||
      z_b.height() != h || c_a.width() != w || c_a.height() != h ||
      c_b.width() != w || c_b.height() != h) {
    throw ValidationError("scene pair: image sizes disagree with intrinsics");
  }
}

Primitive Primitive::Rectangle(const Eigen::Vector3d& center,
                               const Eigen::Vector3d& axis_u,
                               const Eigen::Vector3d& axis_v, double half_u,
                               double half_v, const Texture& texture) {
  Primitive p;
  p.kind = Kind::kRectangle;
  p.center = center;
  p.axis_u = axis_u.normalized();
  p.axis_v = axis_v.normalized();
  p.half_extent = {half_u, half_v, 0.0};
  p.texture = texture;
  return p;
}

Primitive Primitive::Box(const Eigen::Vector3d& center,
                         const Eigen::Vector3d& half_extent, double yaw,
                         const Texture& texture) {
  Primitive p;
  p.kind = Kind::kBox;
  p.center = center;
  p.half_extent = half_extent;
  p.orientation =
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
  p.texture = texture;
  return p;
}

Primitive Primitive::Cylinder(const Eigen::Vector3d& base,
                              const Eigen::Vector3d& axis, double radius,
                              double height, const Texture& texture) {
  Primitive p;
  p.kind = Kind::kCylinder;
  p.center = base;
  p.axis_u = axis.normalized();
  p.radius = radius;
  p.height = height;
  p.texture = texture;
  return p;
}

void SyntheticSceneSpec::Validate() const {
  intrinsics.Validate();
  if (primitives.empty()) throw ValidationError("scene: no primitives");
  for (const Primitive& p : primitives) {
    const bool ok = p.kind == Primitive::Kind::kCylinder
                        ? p.radius > 0.0 && p.height > 0.0
                        : (p.half_extent.array() >= 0.0).all() &&
                              p.half_extent.head<2>().minCoeff() > 0.0;
    if (!ok) throw ValidationError("scene: primitive sizes must be positive");
  }
  if (noise_mm < 0.0) throw ValidationError("scene: negative noise level");
}

RenderedView RenderView(const SyntheticSceneSpec& spec,
                        const RigidTransform& world_from_camera,
                        std::uint64_t seed) {
  const Intrinsics& k = spec.intrinsics;
  RenderedView view{DepthImage(k.width, k.height),
                    ColorImage(k.width, k.height)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Eigen::Vector3d origin = world_from_camera.translation();
  for (int j = 0; j < k.height; ++j) {
    for (int i = 0; i < k.width; ++i) {
      // With a unit z component, the ray parameter equals the depth.
      const Eigen::Vector3d d_cam((i - k.ic) / k.fx, (j - k.jc) / k.fy, 1.0);
      const Eigen::Vector3d d = world_from_camera.rotation() * d_cam;
      const Hit hit = CastRay(spec.primitives, origin, d);
      if (!hit.primitive) continue;
      double mm = 1000.0 * hit.t;
      if (spec.noise_mm > 0.0) mm += spec.noise_mm * noise(rng);
      view.depth.at(i, j) = k.FromMillimeters(mm);
      if (view.depth.at(i, j) == 0) continue;
      view.color.set(i, j, Shade(hit.primitive->texture, origin + hit.t * d));
    }
  }
  return view;
}

ScenePair GenerateSyntheticScene(const SyntheticSceneSpec& spec,
                                 std::uint64_t seed) {
  spec.Validate();
  RenderedView a = RenderView(spec, spec.camera_a, seed);
  RenderedView b = RenderView(spec, spec.camera_b, seed ^ 0x5bd1e995ULL);
  if (a.depth.valid_count() == 0 || b.depth.valid_count() == 0) {
    throw GenerationError("scene '" + spec.name +
                          "': a camera sees no primitive");
  }
  ScenePair pair;
  pair.z_a = std::move(a.depth);
  pair.c_a = std::move(a.color);
  pair.z_b = std::move(b.depth);
  pair.c_b = std::move(b.color);
  pair.intrinsics = spec.intrinsics;
  pair.ground_truth = spec.camera_b.inverse() * spec.camera_a;
  pair.provenance = "synthetic";
  return pair;
}

RigidTransform CameraPose(double yaw, double pitch, double roll,
                          const Eigen::Vector3d& position) {
  const Eigen::Matrix3d r =
      (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  return RigidTransform(r, position);
}

SyntheticSceneSpec PlaneSceneSpec(const Intrinsics& k, double distance_m) {
  SyntheticSceneSpec s;
  s.name = "plane";
  s.intrinsics = k;
  s.primitives.push_back(Primitive::Rectangle(
      {0.0, 0.0, distance_m}, Eigen::Vector3d::UnitX(),
      Eigen::Vector3d::UnitY(), 50.0, 50.0,
      Tex({80, 120, 160}, {220, 190, 120}, 0.25)));
  return s;
}

SyntheticSceneSpec RoomSceneSpec(const Intrinsics& k,
                                 const RigidTransform& camera_b_in_a) {
  SyntheticSceneSpec s;
  s.name = "room";
  s.intrinsics = k;
  AddRoom(s.primitives);
  AddFurniture(s.primitives);
  s.camera_b = camera_b_in_a;
  return s;
}

SyntheticSceneSpec OcclusionSceneSpec(const Intrinsics& k) {
  SyntheticSceneSpec s;
  s.name = "occlusion";
  s.intrinsics = k;
  s.primitives.push_back(Primitive::Rectangle(
      {0.0, 0.0, 3.0}, Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
      6.0, 4.0, Tex({70, 110, 150}, {200, 220, 240}, 0.5)));
  s.primitives.push_back(Primitive::Rectangle(
      {0.0, 1.0, 1.5}, Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(),
      6.0, 1.5, Tex({90, 70, 50}, {170, 140, 100}, 0.6)));
  // Outside sensor a's horizontal field of view, inside sensor b's.
  s.primitives.push_back(Primitive::Cylinder(
      {1.3, 1.0, 1.4}, -Eigen::Vector3d::UnitY(), 0.15, 1.6,
      Tex({170, 40, 140}, {240, 160, 220}, 0.25)));
  s.camera_b = CameraPose(0.0, 0.0, 0.0, {0.8, 0.0, 0.0});
  return s;
}

std::vector<SyntheticSceneSpec> PoseSuiteSpecs(const Intrinsics& k, int count,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::vector<SyntheticSceneSpec> out;
  for (int n = 0; n < count; ++n) {
    Eigen::Vector3d axis(unit(rng), unit(rng), unit(rng));
    axis.normalize();
    const double angle = (15.0 * M_PI / 180.0) * frac(rng);
    Eigen::Vector3d t(unit(rng), unit(rng), unit(rng));
    t = t.normalized() * 0.3 * frac(rng);
    const RigidTransform b(
        Eigen::AngleAxisd(angle, axis).toRotationMatrix(), t);
    SyntheticSceneSpec s = RoomSceneSpec(k, b);
    s.name = "pose-" + std::to_string(n);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SyntheticSceneSpec> StandardSceneSpecs(const Intrinsics& k) {
  constexpr double kDeg = M_PI / 180.0;
  std::vector<SyntheticSceneSpec> out;
  auto room = [&](const std::string& name, const RigidTransform& b) {
    SyntheticSceneSpec s = RoomSceneSpec(k, b);
    s.name = name;
    out.push_back(std::move(s));
  };
  room("room-yaw-left", CameraPose(4.0 * kDeg, 0.0, 0.0, {0.10, 0.0, 0.0}));
  room("room-yaw-right",
       CameraPose(-5.0 * kDeg, 0.0, 0.0, {-0.08, 0.0, 0.05}));
  room("room-tilt", CameraPose(2.0 * kDeg, 3.0 * kDeg, 0.0, {0.0, 0.05, 0.0}));
  room("room-wide", CameraPose(7.0 * kDeg, 0.0, 1.0 * kDeg, {0.15, 0.0, 0.0}));
  room("room-forward", CameraPose(0.0, 0.0, 0.0, {0.0, 0.0, 0.2}));
  room("room-lateral", CameraPose(0.0, 0.0, 0.0, {-0.2, 0.0, 0.0}));
  return out;
}

double FieldOfViewOverlap(const SyntheticSceneSpec& spec) {
  const Intrinsics& k = spec.intrinsics;
  const RigidTransform a_from_world = spec.camera_a.inverse();
  const Eigen::Vector3d a_origin = spec.camera_a.translation();
  const Eigen::Vector3d b_origin = spec.camera_b.translation();
  std::size_t valid = 0, seen = 0;
  for (int j = 0; j < k.height; ++j) {
    for (int i = 0; i < k.width; ++i) {
      const Eigen::Vector3d d =
          spec.camera_b.rotation() *
          Eigen::Vector3d((i - k.ic) / k.fx, (j - k.jc) / k.fy, 1.0);
      const Hit hit = CastRay(spec.primitives, b_origin, d);
      if (!hit.primitive) continue;
      ++valid;
      const Eigen::Vector3d x_world = b_origin + hit.t * d;
      const Eigen::Vector3d x_a = a_from_world * x_world;
      if (x_a.z() <= 0.0) continue;
      const double pi = k.fx * x_a.x() / x_a.z() + k.ic;
      const double pj = k.fy * x_a.y() / x_a.z() + k.jc;
      if (pi < -0.5 || pj < -0.5 || pi >= k.width - 0.5 ||
          pj >= k.height - 0.5) {
        continue;
      }
      const Eigen::Vector3d ray = x_world - a_origin;
      const Hit from_a = CastRay(spec.primitives, a_origin, ray);
      if (from_a.t >= 1.0 - 1e-6) ++seen;
    }
  }
  return valid == 0 ? 0.0 : static_cast<double>(seen) / valid;
}

}  // namespace rprr

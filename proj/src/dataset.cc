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

#include "rprr/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <tuple>

#include <Eigen/Geometry>

#include "rprr/errors.h"
#include "rprr/image_io.h"

namespace rprr {
namespace {

namespace fs = std::filesystem;

// Non-comment, non-blank lines split on whitespace.
std::vector<std::vector<std::string>> ReadFields(const std::string& path) {
  std::istringstream in(ReadFileBytes(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    if (!fields.empty()) rows.push_back(std::move(fields));
  }
  return rows;
}

double ParseNumber(const std::string& text, const std::string& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw IngestionError("'" + path + "': bad number '" + text + "'");
  }
  return v;
}

std::string Join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void RequireFile(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IngestionError("missing file '" + path + "'");
}

DepthImage ReadDepthFor(const std::string& path, const Intrinsics& k) {
  RequireFile(path);
  DepthImage z = ReadDepthImage(path);
  if (z.width() != k.width || z.height() != k.height) {
    throw IngestionError("'" + path + "' does not match the intrinsics size");
  }
  return z;
}

ColorImage ReadColorFor(const std::string& path, const Intrinsics& k) {
  RequireFile(path);
  ColorImage c = ReadColorImage(path);
  if (c.width() != k.width || c.height() != k.height) {
    throw IngestionError("'" + path + "' does not match the intrinsics size");
  }
  return c;
}

ScenePair LoadTum(const std::string& dir, const LoadOptions& o) {
  if (o.first < 0 || o.gap < 0) {
    throw ValidationError("frame index and gap must be non-negative");
  }
  const std::string rgb_list = Join(dir, "rgb.txt");
  const std::string depth_list = Join(dir, "depth.txt");
  RequireFile(rgb_list);
  RequireFile(depth_list);
  const auto pairs = AssociateFrames(ReadTimedFileList(rgb_list),
                                     ReadTimedFileList(depth_list),
                                     o.max_difference_s);
  const std::size_t a = static_cast<std::size_t>(o.first);
  const std::size_t b = a + static_cast<std::size_t>(o.gap);
  if (b >= pairs.size()) {
    throw IngestionError("'" + dir + "' has " + std::to_string(pairs.size()) +
                         " associated frames; frame " + std::to_string(b) +
                         " requested");
  }
  const std::string intrinsics = Join(dir, "intrinsics.txt");
  ScenePair p;
  p.provenance = "dataset";
  p.intrinsics = fs::is_regular_file(intrinsics) ? ReadIntrinsicsFile(intrinsics)
                                                 : TumDefaultIntrinsics();
  p.z_a = ReadDepthFor(Join(dir, pairs[a].depth), p.intrinsics);
  p.c_a = ReadColorFor(Join(dir, pairs[a].rgb), p.intrinsics);
  p.z_b = ReadDepthFor(Join(dir, pairs[b].depth), p.intrinsics);
  p.c_b = ReadColorFor(Join(dir, pairs[b].rgb), p.intrinsics);
  const std::string gt = Join(dir, "groundtruth.txt");
  if (fs::is_regular_file(gt)) {
    const Trajectory t = Trajectory::Read(gt);
    try {
      p.ground_truth = RelativePose(t.At(pairs[a].depth_stamp), t.At(pairs[b].depth_stamp));
    } catch (const ValidationError& e) {
      throw IngestionError("'" + gt + "': " + e.what());
    }
  }
  return p;
}

ScenePair LoadRaw(const std::string& dir) {
  const std::string intrinsics = Join(dir, "intrinsics.txt");
  RequireFile(intrinsics);
  ScenePair p;
  p.provenance = "dataset";
  p.intrinsics = ReadIntrinsicsFile(intrinsics);
  p.z_a = ReadDepthFor(Join(dir, "depth_a.pgm"), p.intrinsics);
  p.c_a = ReadColorFor(Join(dir, "color_a.ppm"), p.intrinsics);
  p.z_b = ReadDepthFor(Join(dir, "depth_b.pgm"), p.intrinsics);
  p.c_b = ReadColorFor(Join(dir, "color_b.ppm"), p.intrinsics);
  return p;
}

}  // namespace

DatasetFormat ParseDatasetFormat(const std::string& name) {
  if (name == "tum") return DatasetFormat::kTum;
  if (name == "raw") return DatasetFormat::kRaw;
  throw ValidationError("unknown dataset format '" + name + "' (expected tum or raw)");
}

std::vector<TimedFile> ReadTimedFileList(const std::string& path) {
  std::vector<TimedFile> out;
  for (const auto& row : ReadFields(path)) {
    if (row.size() < 2) throw IngestionError("'" + path + "': expected 'timestamp file'");
    out.push_back({ParseNumber(row[0], path), row[1]});
  }
  return out;
}

std::vector<Association> AssociateFrames(const std::vector<TimedFile>& rgb,
                                         const std::vector<TimedFile>& depth,
                                         double max_difference_s) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    for (std::size_t j = 0; j < depth.size(); ++j) {
      const double d = std::abs(rgb[i].stamp - depth[j].stamp);
      if (d < max_difference_s) candidates.emplace_back(d, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<bool> rgb_used(rgb.size()), depth_used(depth.size());
  std::vector<Association> out;
  for (const auto& [d, i, j] : candidates) {
    if (rgb_used[i] || depth_used[j]) continue;
    rgb_used[i] = depth_used[j] = true;
    out.push_back({rgb[i].stamp, rgb[i].file, depth[j].stamp, depth[j].file});
  }
  std::sort(out.begin(), out.end(), [](const Association& a, const Association& b) {
    return a.rgb_stamp < b.rgb_stamp;
  });
  return out;
}

Trajectory::Trajectory(std::vector<TrajectorySample> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) throw ValidationError("trajectory has no samples");
  for (std::size_t n = 1; n < samples_.size(); ++n) {
    if (!(samples_[n].stamp > samples_[n - 1].stamp)) {
      throw ValidationError("trajectory timestamps must increase");
    }
  }
}

Trajectory Trajectory::Read(const std::string& path) {
  std::vector<TrajectorySample> samples;
  for (const auto& row : ReadFields(path)) {
    if (row.size() != 8) {
      throw IngestionError("'" + path + "': expected 'timestamp tx ty tz qx qy qz qw'");
    }
    double v[8];
    for (int k = 0; k < 8; ++k) v[k] = ParseNumber(row[k], path);
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (q.norm() < 1e-6) throw IngestionError("'" + path + "': zero quaternion");
    q.normalize();
    samples.push_back({v[0], RigidTransform(q.toRotationMatrix(), {v[1], v[2], v[3]})});
  }
  try {
    return Trajectory(std::move(samples));
  } catch (const ValidationError& e) {
    throw IngestionError("'" + path + "': " + e.what());
  }
}

RigidTransform Trajectory::At(double stamp) const {
  if (stamp < samples_.front().stamp || stamp > samples_.back().stamp) {
    throw ValidationError("time " + std::to_string(stamp) + " outside the trajectory");
  }
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), stamp,
                             [](const TrajectorySample& s, double t) { return s.stamp < t; });
  if (hi->stamp == stamp) return hi->pose;
  const auto lo = hi - 1;
  const double f = (stamp - lo->stamp) / (hi->stamp - lo->stamp);
  const Eigen::Quaterniond q0(lo->pose.rotation()), q1(hi->pose.rotation());
  const Eigen::Matrix3d r = q0.slerp(f, q1).normalized().toRotationMatrix();
  const Eigen::Vector3d t = (1 - f) * lo->pose.translation() + f * hi->pose.translation();
  return RigidTransform(r, t);
}

RigidTransform RelativePose(const RigidTransform& world_from_a,
                            const RigidTransform& world_from_b) {
  return world_from_b.inverse() * world_from_a;
}

Intrinsics TumDefaultIntrinsics() {
  Intrinsics k;
  k.fx = 525.0;
  k.fy = 525.0;
  k.ic = 319.5;
  k.jc = 239.5;
  k.width = 640;
  k.height = 480;
  k.depth_scale = 0.2;  // 5000 units per meter
  return k;
}

ScenePair LoadScenePair(const std::string& path, DatasetFormat format,
                        const LoadOptions& options) {
  if (!fs::is_directory(path)) throw IngestionError("'" + path + "' is not a directory");
  ScenePair p = format == DatasetFormat::kTum ? LoadTum(path, options) : LoadRaw(path);
  try {
    p.Validate();
  } catch (const ValidationError& e) {
    throw IngestionError("'" + path + "': " + e.what());
  }
  return p;
}

void SaveRawScenePair(const std::string& dir, const ScenePair& pair) {
  pair.Validate();
  fs::create_directories(dir);
  WriteIntrinsicsFile(Join(dir, "intrinsics.txt"), pair.intrinsics);
  WriteDepthImage(Join(dir, "depth_a.pgm"), pair.z_a);
  WriteColorImage(Join(dir, "color_a.ppm"), pair.c_a);
  WriteDepthImage(Join(dir, "depth_b.pgm"), pair.z_b);
  WriteColorImage(Join(dir, "color_b.ppm"), pair.c_b);
}

}  // namespace rprr

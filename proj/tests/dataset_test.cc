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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "rprr/errors.h"
#include "rprr/image_io.h"
#include "rprr/synthetic.h"

namespace rprr {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("rprr_dataset_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& f) const { return (path_ / f).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

// Rotation about y by `angle`, as world-from-camera.
RigidTransform YawPose(double angle, const Eigen::Vector3d& t) {
  Eigen::Matrix3d r;
  r << std::cos(angle), 0, std::sin(angle), 0, 1, 0, -std::sin(angle), 0, std::cos(angle);
  return RigidTransform(r, t);
}

// TUM line for a world-from-camera yaw pose.
std::string TumLine(double stamp, double angle, const Eigen::Vector3d& t) {
  std::ostringstream s;
  s.precision(17);
  s << stamp << " " << t.x() << " " << t.y() << " " << t.z() << " 0 "
    << std::sin(angle / 2) << " 0 " << std::cos(angle / 2) << "\n";
  return s.str();
}

Intrinsics Tiny() {
  Intrinsics k = Intrinsics::ScaledVga(32, 24);
  k.depth_scale = 0.2;
  return k;
}

// Sequence of 12 frames; camera yaw grows linearly from 0 at t=0 to 0.4 rad
// at t=2 while it moves 0.3 m along x.
void MakeSequence(const TempDir& dir) {
  const Intrinsics k = Tiny();
  WriteIntrinsicsFile(dir / "intrinsics.txt", k);
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "depth");
  std::string rgb = "# color images\n", depth = "# depth maps\n";
  for (int n = 0; n < 12; ++n) {
    const double t = 0.1 * n + 0.05;
    const std::string name = std::to_string(n) + ".png";
    SyntheticSceneSpec spec = PlaneSceneSpec(k, 1.0 + 0.05 * n);
    const RenderedView v = RenderView(spec, spec.camera_a, 1);
    WriteDepthImage(dir / ("depth/" + name), v.depth);
    WriteColorImage(dir / ("rgb/" + name), v.color);
    rgb += std::to_string(t + 0.004) + " rgb/" + name + "\n";
    depth += std::to_string(t) + " depth/" + name + "\n";
  }
  rgb += "5.0 rgb/0.png\n";  // no depth partner
  WriteText(dir / "rgb.txt", rgb);
  WriteText(dir / "depth.txt", depth);
  std::string gt = "# timestamp tx ty tz qx qy qz qw\n";
  for (double t : {0.0, 0.7, 2.0}) gt += TumLine(t, 0.2 * t, {0.15 * t, 0, 0});
  WriteText(dir / "groundtruth.txt", gt);
}

TEST(AssociateFramesTest, ClosestPairsWithinTolerance) {
  const std::vector<TimedFile> rgb{{1.00, "r1"}, {1.03, "r2"}, {2.00, "r3"}, {3.0, "r4"}};
  const std::vector<TimedFile> depth{{1.01, "d1"}, {1.029, "d2"}, {2.5, "d3"}};
  const auto a = AssociateFrames(rgb, depth, 0.02);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].rgb, "r1");
  EXPECT_EQ(a[0].depth, "d1");
  EXPECT_EQ(a[1].rgb, "r2");
  EXPECT_EQ(a[1].depth, "d2");
  const auto tight = AssociateFrames(rgb, depth, 0.002);
  ASSERT_EQ(tight.size(), 1u);
  EXPECT_EQ(tight[0].rgb, "r2");
}

TEST(TrajectoryTest, InterpolatesLinearlyInAngleAndPosition) {
  const Trajectory t({{0.0, YawPose(0.0, {0, 0, 0})}, {2.0, YawPose(0.6, {1, 0, -2})}});
  for (double s : {0.0, 0.25, 1.0, 1.9, 2.0}) {
    const RigidTransform p = t.At(s);
    const RigidTransform expected = YawPose(0.3 * s, {0.5 * s, 0, -s});
    EXPECT_TRUE(p.matrix().isApprox(expected.matrix(), 1e-12)) << s;
  }
  EXPECT_THROW(t.At(-0.1), ValidationError);
  EXPECT_THROW(t.At(2.1), ValidationError);
  EXPECT_THROW(Trajectory({}), ValidationError);
  EXPECT_THROW(Trajectory({{1.0, RigidTransform()}, {1.0, RigidTransform()}}), ValidationError);
}

TEST(RelativePoseTest, MapsPointsBetweenCameras) {
  const RigidTransform wa = YawPose(0.3, {1, 2, 3});
  const RigidTransform wb = YawPose(-0.2, {0.5, 2, 4});
  const Eigen::Vector3d x_a(0.1, -0.4, 2.0);
  const Eigen::Vector3d world = wa * x_a;
  EXPECT_TRUE((RelativePose(wa, wb) * x_a).isApprox(wb.inverse() * world, 1e-12));
}

TEST(LoadScenePairTest, TumSequenceWithGroundTruth) {
  TempDir dir;
  MakeSequence(dir);
  LoadOptions o;
  o.first = 1;
  o.gap = 10;
  const ScenePair p = LoadScenePair(dir.str(), DatasetFormat::kTum, o);
  EXPECT_EQ(p.provenance, "dataset");
  EXPECT_EQ(p.z_a, ReadDepthImage(dir / "depth/1.png"));
  EXPECT_EQ(p.c_b, ReadColorImage(dir / "rgb/11.png"));
  ASSERT_TRUE(p.ground_truth.has_value());
  // Depth timestamps 0.15 and 1.15.
  const RigidTransform wa = YawPose(0.2 * 0.15, {0.15 * 0.15, 0, 0});
  const RigidTransform wb = YawPose(0.2 * 1.15, {0.15 * 1.15, 0, 0});
  const Eigen::Matrix3d r = wb.rotation().transpose() * wa.rotation();
  const Eigen::Vector3d t = wb.rotation().transpose() * (wa.translation() - wb.translation());
  EXPECT_TRUE(p.ground_truth->rotation().isApprox(r, 1e-9));
  EXPECT_TRUE(p.ground_truth->translation().isApprox(t, 1e-9));
  EXPECT_NEAR(p.ground_truth->angle(), 0.2, 1e-9);
}

TEST(LoadScenePairTest, ZeroGapIsIdentity) {
  TempDir dir;
  MakeSequence(dir);
  LoadOptions o;
  o.first = 4;
  o.gap = 0;
  const ScenePair p = LoadScenePair(dir.str(), DatasetFormat::kTum, o);
  EXPECT_EQ(p.z_a, p.z_b);
  EXPECT_LT(p.ground_truth->angle(), 1e-12);
  EXPECT_LT(p.ground_truth->translation().norm(), 1e-12);
}

TEST(LoadScenePairTest, TumWithoutTrajectoryOrOutOfRange) {
  TempDir dir;
  MakeSequence(dir);
  fs::remove(dir / "groundtruth.txt");
  EXPECT_FALSE(LoadScenePair(dir.str(), DatasetFormat::kTum).ground_truth.has_value());
  LoadOptions o;
  o.first = 5;
  o.gap = 7;
  EXPECT_THROW(LoadScenePair(dir.str(), DatasetFormat::kTum, o), IngestionError);
}

TEST(LoadScenePairTest, RawRoundTripHasNoGroundTruth) {
  TempDir dir;
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Tiny(), CameraPose(0.05, 0, 0, {0.02, 0, 0})), 1);
  SaveRawScenePair(dir / "pair", s);
  const ScenePair p = LoadScenePair(dir / "pair", DatasetFormat::kRaw);
  EXPECT_EQ(p.z_a, s.z_a);
  EXPECT_EQ(p.c_a, s.c_a);
  EXPECT_EQ(p.z_b, s.z_b);
  EXPECT_EQ(p.c_b, s.c_b);
  EXPECT_EQ(p.intrinsics.Hash(), s.intrinsics.Hash());
  EXPECT_FALSE(p.ground_truth.has_value());
}

std::string IngestionMessage(const std::string& path, DatasetFormat f) {
  try {
    LoadScenePair(path, f);
  } catch (const IngestionError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadScenePairTest, ErrorsNameTheFile) {
  TempDir dir;
  MakeSequence(dir);
  WriteText(dir / "depth/3.png", "not a png at all");
  LoadOptions o;
  o.first = 3;
  EXPECT_THROW(LoadScenePair(dir.str(), DatasetFormat::kTum, o), IngestionError);
  fs::remove(dir / "rgb.txt");
  EXPECT_NE(IngestionMessage(dir.str(), DatasetFormat::kTum).find("rgb.txt"), std::string::npos);
  EXPECT_NE(IngestionMessage(dir.str(), DatasetFormat::kRaw).find("depth_a.pgm"),
            std::string::npos);
  fs::remove(dir / "intrinsics.txt");
  EXPECT_NE(IngestionMessage(dir.str(), DatasetFormat::kRaw).find("intrinsics.txt"),
            std::string::npos);
  EXPECT_THROW(LoadScenePair(dir / "nothing", DatasetFormat::kRaw), IngestionError);

  TempDir raw;
  const ScenePair s = GenerateSyntheticScene(RoomSceneSpec(Tiny(), RigidTransform()), 1);
  SaveRawScenePair(raw / "p", s);
  fs::remove(raw / "p/color_b.ppm");
  EXPECT_NE(IngestionMessage(raw / "p", DatasetFormat::kRaw).find("color_b.ppm"),
            std::string::npos);
  WriteIntrinsicsFile(raw / "p/intrinsics.txt", Intrinsics::ScaledVga(16, 12));
  EXPECT_NE(IngestionMessage(raw / "p", DatasetFormat::kRaw).find("depth_a.pgm"),
            std::string::npos);
}

TEST(LoadScenePairTest, MalformedListsAndTrajectories) {
  TempDir dir;
  MakeSequence(dir);
  WriteText(dir / "groundtruth.txt", "0.0 1 2 3 0 0 0\n");
  EXPECT_THROW(LoadScenePair(dir.str(), DatasetFormat::kTum), IngestionError);
  WriteText(dir / "groundtruth.txt", "0.0 1 2 3 0 0 0 0\n");
  EXPECT_THROW(LoadScenePair(dir.str(), DatasetFormat::kTum), IngestionError);
  WriteText(dir / "groundtruth.txt", "1.0 0 0 0 0 0 0 1\n");
  EXPECT_THROW(LoadScenePair(dir.str(), DatasetFormat::kTum), IngestionError);
  WriteText(dir / "depth.txt", "abc depth/0.png\n");
  EXPECT_THROW(LoadScenePair(dir.str(), DatasetFormat::kTum), IngestionError);
}

TEST(TumIntrinsicsTest, DefaultCalibration) {
  const Intrinsics k = TumDefaultIntrinsics();
  EXPECT_EQ(k.width, 640);
  EXPECT_DOUBLE_EQ(k.ic, 319.5);
  EXPECT_EQ(k.FromMillimeters(1000.0), 5000);
  EXPECT_EQ(ParseDatasetFormat("raw"), DatasetFormat::kRaw);
  EXPECT_THROW(ParseDatasetFormat("png"), ValidationError);
}

}  // namespace
}  // namespace rprr

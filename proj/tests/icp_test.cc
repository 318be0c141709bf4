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

#include "rprr/icp.h"

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "gtest/gtest.h"
#include "rprr/errors.h"
#include "rprr/synthetic.h"

namespace rprr {
namespace {

constexpr double kDeg = M_PI / 180.0;

Intrinsics Small() { return Intrinsics::ScaledVga(160, 120); }

DepthImage ConstantDepth(int w, int h, std::uint16_t mm) {
  return DepthImage(w, h, std::vector<std::uint16_t>(w * h, mm));
}

TEST(SamplePointsTest, FullFrameGivesRequestedCount) {
  const DepthImage z = ConstantDepth(640, 480, 1000);
  const auto points = SamplePoints(z, Intrinsics::Vga(), 250, 42);
  ASSERT_EQ(points.size(), 250u);
  for (const SampledPoint& p : points) {
    EXPECT_GT(p.z_mm, 0.0);
    EXPECT_TRUE(z.contains(p.i, p.j));
  }
}

TEST(SamplePointsTest, AllInvalidFrameFails) {
  EXPECT_THROW(SamplePoints(DepthImage(64, 48), Intrinsics::ScaledVga(64, 48),
                            250, 1),
               InsufficientDataError);
}

TEST(SamplePointsTest, DeterministicPerSeed) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), RigidTransform()), 1);
  const auto a = SamplePoints(s.z_a, Small(), 250, 9);
  const auto b = SamplePoints(s.z_a, Small(), 250, 9);
  const auto c = SamplePoints(s.z_a, Small(), 250, 10);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].i, b[n].i);
    EXPECT_EQ(a[n].j, b[n].j);
    differs |= a[n].i != c[n].i || a[n].j != c[n].j;
  }
  EXPECT_TRUE(differs);
}

TEST(EstimateNormalTest, FrontoParallelPlane) {
  const DepthImage z = ConstantDepth(64, 64, 1000);
  const Eigen::Vector3d n =
      EstimateNormal(z, 20, 30, Intrinsics::ScaledVga(64, 64));
  EXPECT_NEAR(n.x(), 0.0, 1e-6);
  EXPECT_NEAR(n.y(), 0.0, 1e-6);
  EXPECT_NEAR(n.z(), -1.0, 1e-6);
}

TEST(EstimateNormalTest, RampAtFortyFiveDegrees) {
  // Surface z + x = 1 m; fine depth units keep quantization out of the way.
  Intrinsics k = Intrinsics::ScaledVga(64, 64);
  k.depth_scale = 0.02;
  DepthImage z(64, 64);
  for (int j = 0; j < 64; ++j) {
    for (int i = 0; i < 64; ++i) {
      const double u = (i - k.ic) / k.fx;
      z.at(i, j) = k.FromMillimeters(1000.0 / (1.0 + u));
    }
  }
  const Eigen::Vector3d n = EstimateNormal(z, 32, 32, k);
  const Eigen::Vector3d expected = Eigen::Vector3d(-1, 0, -1).normalized();
  EXPECT_LT((n - expected).norm(), 1e-3);
}

TEST(EstimateNormalTest, IsolatedPixelHasNoNormal) {
  DepthImage z(16, 16);
  z.at(8, 8) = 1000;
  EXPECT_THROW(EstimateNormal(z, 8, 8, Intrinsics::ScaledVga(16, 16)),
               NoNormalError);
}

TEST(FindCorrespondenceTest, IdentityReturnsOwnPixel) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), RigidTransform()), 1);
  for (const SampledPoint& p : SamplePoints(s.z_a, Small(), 50, 3)) {
    const auto m = FindCorrespondence(p, s.z_a, Small(), 7);
    ASSERT_TRUE(m.has_value());
    EXPECT_EQ(m->i, p.i);
    EXPECT_EQ(m->j, p.j);
  }
}

TEST(FindCorrespondenceTest, OutsideImageIsNone) {
  const DepthImage z = ConstantDepth(64, 64, 1000);
  const Intrinsics k = Intrinsics::ScaledVga(64, 64);
  EXPECT_FALSE(FindCorrespondence(SampledPoint::FromPixel(-3, 10, 1000, k), z,
                                  k, 7)
                   .has_value());
  EXPECT_FALSE(FindCorrespondence(SampledPoint::FromPixel(10, 64, 1000, k), z,
                                  k, 7)
                   .has_value());
}

TEST(FindCorrespondenceTest, MatchesExhaustiveNearestNeighbor) {
  // A tilted plane seen from two poses three pixels apart.
  const Intrinsics k = Intrinsics::ScaledVga(64, 64);
  SyntheticSceneSpec spec;
  spec.intrinsics = k;
  spec.primitives.push_back(Primitive::Rectangle(
      {0.0, 0.0, 1.2}, Eigen::Vector3d(1, 0, 0.3), Eigen::Vector3d::UnitY(),
      5.0, 5.0, Texture{}));
  const double shift = 3.0 * 1.2 / k.fx;
  spec.camera_b = RigidTransform::Translation({shift, 0.0, 0.0});
  const ScenePair s = GenerateSyntheticScene(spec, 1);
  const RigidTransform m = *s.ground_truth;
  for (const SampledPoint& p : SamplePoints(s.z_a, k, 100, 5)) {
    const QueryRecord q = MakeQuery(m, p, k);
    if (!s.z_b.contains(q.i, q.j)) continue;
    const SampledPoint query =
        SampledPoint::FromPixel(q.i, q.j, k.ToMillimeters(q.z), k);
    const auto match = FindCorrespondence(query, s.z_b, k, 7);
    ASSERT_TRUE(match.has_value());
    double best = 1e300;
    int bi = -1, bj = -1;
    for (int j = 0; j < 64; ++j) {
      for (int i = 0; i < 64; ++i) {
        if (!s.z_b.valid(i, j)) continue;
        const double z = s.z_b.at(i, j) / 1000.0;
        const Eigen::Vector3d x((i - k.ic) / k.fx * z, (j - k.jc) / k.fy * z,
                                z);
        const double d2 = (x - query.uvq.euclidean()).squaredNorm();
        if (d2 < best) {
          best = d2;
          bi = i;
          bj = j;
        }
      }
    }
    EXPECT_EQ(match->i, bi);
    EXPECT_EQ(match->j, bj);
  }
}

TEST(ComputeWeightTest, Branches) {
  EXPECT_DOUBLE_EQ(ComputeWeight(1000, 1000, 37).weight, 1.0);
  EXPECT_DOUBLE_EQ(ComputeWeight(1000, 900, 50).weight, 1.0 / 3.0);
  EXPECT_NEAR(ComputeWeight(900, 1000, 50).weight, 50.0 / 10050.0, 1e-15);
  const WeightResult bad = ComputeWeight(1000, 900, 0.0);
  EXPECT_EQ(bad.weight, 0.0);
  EXPECT_TRUE(bad.outlier);
}

TEST(ComputeWeightTest, BoundsProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> z(300, 5000), c(0.5, 200);
  for (int n = 0; n < 10000; ++n) {
    const double za = z(rng), zb = z(rng);
    const WeightResult w = ComputeWeight(za, zb, c(rng));
    EXPECT_GE(w.weight, 0.0);
    EXPECT_LE(w.weight, 1.0);
  }
}

TEST(NormalEncodingTest, RoundTripPrecision) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int n = 0; n < 1000; ++n) {
    const Eigen::Vector3d v = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const Eigen::Vector3d back = DecodeNormal(EncodeNormal(v));
    EXPECT_NEAR(back.norm(), 1.0, 1e-12);
    EXPECT_LT((back - v).norm(), 2e-4);
  }
}

Correspondence MakeCorrespondence(const Eigen::Vector3d& x_a,
                                  const Eigen::Vector3d& x_b,
                                  const Eigen::Vector3d& normal) {
  Correspondence c;
  c.a_point.uvq = InverseDepthPoint::FromEuclidean(x_a);
  c.a_point.z_mm = 1000.0 * x_a.z();
  c.b_point.uvq = InverseDepthPoint::FromEuclidean(x_b);
  c.b_point.z_mm = 1000.0 * x_b.z();
  c.warped = c.a_point.uvq;
  c.normal = normal;
  return c;
}

TEST(AssembleSystemTest, ZeroResidualForIdenticalPoints) {
  std::vector<Correspondence> cs;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> xy(-0.5, 0.5), z(1.0, 3.0);
  std::normal_distribution<double> g;
  for (int n = 0; n < 10; ++n) {
    const Eigen::Vector3d x(xy(rng), xy(rng), z(rng));
    cs.push_back(MakeCorrespondence(
        x, x, Eigen::Vector3d(g(rng), g(rng), -3.0).normalized()));
  }
  const NormalSystem s = AssembleSystem(cs);
  EXPECT_EQ(s.rows(), 10);
  EXPECT_TRUE(s.y.isZero(0.0));
}

TEST(AssembleSystemTest, JacobianRowAtPrincipalAxis) {
  // u = v = 0, q = 1, normal (0, 0, -1) through X = (0, 0, 1):
  // residual gradient (0, 0, 1); J rows at this point are
  //   [1 0  0  0 1 0], [0 1 0 -1 0 0], [0 0 -1 0 0 0].
  std::vector<Correspondence> cs(
      6, MakeCorrespondence({0, 0, 1}, {0, 0, 1}, {0, 0, -1}));
  const NormalSystem s = AssembleSystem(cs);
  Eigen::Matrix<double, 1, 6> expected;
  expected << 0, 0, -1, 0, 0, 0;
  EXPECT_TRUE(s.k.row(0).isApprox(expected));

  const Eigen::Matrix<double, 3, 6> j = InverseDepthJacobian({0.0, 0.0, 1.0});
  Eigen::Matrix<double, 3, 6> hand;
  hand << 1, 0, 0, 0, 1, 0,  //
      0, 1, 0, -1, 0, 0,     //
      0, 0, -1, 0, 0, 0;
  EXPECT_TRUE(j.isApprox(hand));
}

TEST(AssembleSystemTest, JacobianMatchesFiniteDifferences) {
  const InverseDepthPoint p{0.2, -0.15, 0.7};
  const Eigen::Matrix<double, 3, 6> j = InverseDepthJacobian(p);
  const double h = 1e-7;
  for (int k = 0; k < 6; ++k) {
    Vector6d a = Vector6d::Zero();
    a[k] = h;
    const InverseDepthPoint plus = Se3ApplyUvq(Se3Exp(MotionVector(a)), p);
    a[k] = -h;
    const InverseDepthPoint minus = Se3ApplyUvq(Se3Exp(MotionVector(a)), p);
    EXPECT_NEAR((plus.u - minus.u) / (2 * h), j(0, k), 1e-6);
    EXPECT_NEAR((plus.v - minus.v) / (2 * h), j(1, k), 1e-6);
    EXPECT_NEAR((plus.q - minus.q) / (2 * h), j(2, k), 1e-6);
  }
}

TEST(AssembleSystemTest, TooFewRows) {
  std::vector<Correspondence> cs(
      5, MakeCorrespondence({0, 0, 1}, {0, 0, 1}, {0, 0, -1}));
  EXPECT_THROW(AssembleSystem(cs), UnderdeterminedError);
}

// Points on three mutually oblique planes, observed in frame b; frame-a
// points are the exact preimages under exp(b_true).
std::vector<Correspondence> ThreePlaneCorrespondences(const Vector6d& b_true,
                                                      std::uint64_t seed) {
  const RigidTransform e = Se3Exp(MotionVector(b_true));
  const RigidTransform e_inv = e.inverse();
  const Eigen::Vector3d normals[3] = {
      Eigen::Vector3d(0.0, 0.0, -1.0),
      Eigen::Vector3d(0.8, 0.0, -0.6).normalized(),
      Eigen::Vector3d(0.0, -0.7, -0.7).normalized()};
  const double offsets[3] = {-3.0, -1.0, -1.2};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uv(-0.5, 0.5);
  std::vector<Correspondence> out;
  for (int p = 0; p < 3; ++p) {
    for (int n = 0; n < 40; ++n) {
      // Intersect the pixel ray with the plane n . x = d.
      const Eigen::Vector3d ray(uv(rng), uv(rng), 1.0);
      const double t = offsets[p] / normals[p].dot(ray);
      const Eigen::Vector3d x_b = t * ray;
      out.push_back(MakeCorrespondence(e_inv * x_b, x_b, normals[p]));
    }
  }
  return out;
}

TEST(SolveMotionTest, ZeroResidualGivesZeroMotion) {
  const auto cs = ThreePlaneCorrespondences(Vector6d::Zero(), 1);
  const MotionVector b = SolveMotion(AssembleSystem(cs));
  EXPECT_LT(b.norm(), 1e-15);
}

TEST(SolveMotionTest, OneStepRecoversSmallMotion) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    Vector6d b_true;
    for (int k = 0; k < 6; ++k) b_true[k] = g(rng);
    b_true *= 1e-4 / b_true.norm();
    const auto cs = ThreePlaneCorrespondences(b_true, trial);
    const MotionVector b = SolveMotion(AssembleSystem(cs));
    EXPECT_LT((b.alpha() - b_true).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(SolveMotionTest, ResidualIsMinimal) {
  Vector6d b_true;
  b_true << 0.01, -0.02, 0.005, 0.01, 0.02, -0.01;
  auto cs = ThreePlaneCorrespondences(b_true, 3);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  for (auto& c : cs) c.weight = w(rng);
  const NormalSystem s = AssembleSystem(cs);
  const Vector6d b = SolveMotion(s).alpha();
  auto objective = [&](const Vector6d& x) {
    return (s.w.cwiseSqrt().asDiagonal() * (s.k * x - s.y)).norm();
  };
  const double best = objective(b);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int n = 0; n < 200; ++n) {
    Vector6d d;
    for (int k = 0; k < 6; ++k) d[k] = g(rng);
    EXPECT_GE(objective(b + d), best);
  }
}

TEST(SolveMotionTest, SinglePlaneIsDegenerate) {
  std::vector<Correspondence> cs;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> xy(-0.5, 0.5);
  for (int n = 0; n < 50; ++n) {
    const Eigen::Vector3d x(xy(rng), xy(rng), 1.5);
    cs.push_back(MakeCorrespondence(x, x + Eigen::Vector3d(0, 0, 0.01),
                                    {0, 0, -1}));
  }
  EXPECT_THROW(SolveMotion(AssembleSystem(cs)), DegenerateGeometryError);
}

IcpConfig SmallConfig() {
  IcpConfig c;
  c.seed = 17;
  return c;
}

TEST(IcpStepTest, IdenticalFramesConvergeImmediately) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), RigidTransform()), 1);
  IcpEstimator a(s.z_a, Small(), SmallConfig());
  const IcpResponder b(s.z_a, Small(), SmallConfig());
  a.SetPeerSamples(b.samples());
  const IterationTrace t = a.Step(b.Answer(a.Queries()));
  EXPECT_TRUE(a.converged());
  EXPECT_NEAR(t.cost, 0.0, 1e-20);
  EXPECT_TRUE(a.pose().matrix().isIdentity(1e-12));
}

TEST(IcpStepTest, CostDecreasesOnYawOffset) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), CameraPose(5 * kDeg, 0, 0, {0, 0, 0})), 1);
  IcpEstimator a(s.z_a, Small(), SmallConfig());
  const IcpResponder b(s.z_b, Small(), SmallConfig());
  a.SetPeerSamples(b.samples());
  std::vector<double> costs;
  for (int n = 0; n < 4; ++n) {
    costs.push_back(a.Step(b.Answer(a.Queries())).cost);
  }
  EXPECT_LT(costs[1], costs[0]);
  EXPECT_LT(costs[2], costs[1]);
  EXPECT_LT(costs[3], costs[2]);
}

TEST(IcpStepTest, DisjointFramesFail) {
  const int w = 160, h = 120;
  DepthImage za(w, h), zb(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (i < 50) za.at(i, j) = 1500;
      if (i >= 110) zb.at(i, j) = 1500;
    }
  }
  EXPECT_THROW(RunIcpLocal(za, zb, Small(), SmallConfig()),
               InsufficientDataError);
}

double RotationErrorDeg(const RigidTransform& a, const RigidTransform& b) {
  return (a.inverse() * b).angle() / kDeg;
}

double TranslationErrorMm(const RigidTransform& a, const RigidTransform& b) {
  return 1000.0 * (a.translation() - b.translation()).norm();
}

TEST(RunIcpLocalTest, IdenticalFrames) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), RigidTransform()), 1);
  const IcpResult r = RunIcpLocal(s.z_a, s.z_a, Small(), SmallConfig());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LT(r.pose.translation().norm(), 1e-4);
  EXPECT_LT(r.pose.angle() / kDeg, 0.01);
}

TEST(RunIcpLocalTest, RecoversYawAndLateralOffset) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), CameraPose(5 * kDeg, 0, 0, {0.1, 0, 0})), 1);
  const IcpResult r = RunIcpLocal(s.z_a, s.z_b, Small(), SmallConfig());
  EXPECT_TRUE(r.converged);
  EXPECT_LE(RotationErrorDeg(r.pose, *s.ground_truth), 0.5);
  EXPECT_LE(TranslationErrorMm(r.pose, *s.ground_truth), 10.0);
}

TEST(RunIcpLocalTest, SwappingRolesGivesInverse) {
  const Intrinsics k = Intrinsics::ScaledVga(320, 240);
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(k, CameraPose(-4 * kDeg, 2 * kDeg, 0, {0.05, 0.02, 0.08})),
      2);
  const IcpResult ab = RunIcpLocal(s.z_a, s.z_b, k, SmallConfig());
  const IcpResult ba = RunIcpLocal(s.z_b, s.z_a, k, SmallConfig());
  ASSERT_TRUE(ab.converged);
  ASSERT_TRUE(ba.converged);
  EXPECT_LE(RotationErrorDeg(ba.pose, ab.pose.inverse()), 0.1);
  EXPECT_LE(TranslationErrorMm(ba.pose, ab.pose.inverse()), 2.0);
}

TEST(RunIcpLocalTest, AcceptedCostIsNonIncreasing) {
  const auto specs = PoseSuiteSpecs(Small(), 10, 77);
  for (std::size_t n = 0; n < specs.size(); ++n) {
    const ScenePair s = GenerateSyntheticScene(specs[n], n + 1);
    const IcpResult r = RunIcpLocal(s.z_a, s.z_b, Small(), SmallConfig());
    double last = -1.0;
    for (const IterationTrace& t : r.trace) {
      if (!t.accepted) continue;
      const double score = t.cost / t.rows;
      if (last >= 0.0) EXPECT_LE(score, last) << specs[n].name;
      last = score;
    }
  }
}

TEST(RunIcpLocalTest, DeterministicTraces) {
  const ScenePair s = GenerateSyntheticScene(
      RoomSceneSpec(Small(), CameraPose(6 * kDeg, 0, 0, {0, 0.05, 0})), 3);
  const IcpResult r1 = RunIcpLocal(s.z_a, s.z_b, Small(), SmallConfig());
  const IcpResult r2 = RunIcpLocal(s.z_a, s.z_b, Small(), SmallConfig());
  EXPECT_TRUE(r1.pose == r2.pose);
  ASSERT_EQ(r1.trace.size(), r2.trace.size());
  for (std::size_t n = 0; n < r1.trace.size(); ++n) {
    EXPECT_EQ(r1.trace[n].cost, r2.trace[n].cost);
  }
}

TEST(RunIcpLocalTest, RejectedStepEndsWithTheAcceptedEstimate) {
  const auto specs = PoseSuiteSpecs(Small(), 10, 77);
  int stopped = 0;
  for (std::size_t n = 0; n < specs.size(); ++n) {
    const ScenePair s = GenerateSyntheticScene(specs[n], n + 1);
    IcpConfig halving = SmallConfig();
    halving.max_rejections = 0;
    const IcpResult full = RunIcpLocal(s.z_a, s.z_b, Small(), halving);
    const IcpResult r = RunIcpLocal(s.z_a, s.z_b, Small(), SmallConfig());
    // Identical up to the first rejected step.
    ASSERT_LE(r.trace.size(), full.trace.size());
    for (std::size_t t = 0; t < r.trace.size(); ++t) {
      EXPECT_EQ(r.trace[t].cost, full.trace[t].cost) << specs[n].name;
    }
    if (!r.trace.back().accepted) {
      ++stopped;
      EXPECT_TRUE(r.converged);
      for (std::size_t t = 0; t + 1 < r.trace.size(); ++t) EXPECT_TRUE(r.trace[t].accepted);
    }
  }
  EXPECT_GT(stopped, 0);
}

TEST(IcpConfigTest, Validation) {
  IcpConfig c;
  c.neighborhood = 6;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = IcpConfig();
  c.max_rejections = -1;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = IcpConfig();
  c.n_samples = 5;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = IcpConfig();
  c.max_iterations = 0;
  EXPECT_THROW(c.Validate(), ValidationError);
}

}  // namespace
}  // namespace rprr

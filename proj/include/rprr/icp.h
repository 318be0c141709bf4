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

// Bidirectional point-to-plane ICP in inverse depth coordinates.
//
// Both matching directions are expressed in sensor b's frame: every
// correspondence pairs a point from Z_a, warped by the current estimate
// M_ab, with a point from Z_b and the surface normal at that point. For the
// a->b direction the Z_a point is a sample and the Z_b point is its match;
// for b->a the Z_b point is a sample and the Z_a point is its match.
//
// The residual of a correspondence is measured in (u, v, q) space against the
// plane through the Z_b point: with unit normal n and offset d = n . X_b the
// plane reads n1 u + n2 v + n3 - d q = 0, whose gradient (n1, n2, -d) is the
// row vector multiplied into the 3x6 inverse depth Jacobian J.
//
// The estimator is split into the two roles of the distributed protocol:
// `IcpResponder` runs where Z_b lives and answers match queries;
// `IcpEstimator` runs where Z_a lives, builds the weighted normal equations
// and owns the pose. `RunIcpLocal` simply wires the two together in-process.

#ifndef RPRR_ICP_H_
#define RPRR_ICP_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rprr/geometry.h"

namespace rprr {

struct IcpConfig {
  int n_samples = 250;
  int max_iterations = 50;
  // Side of the square project-and-walk search window, in pixels.
  int neighborhood = 7;
  double translation_eps = 1e-4;            // meters
  double rotation_eps = 0.01 * M_PI / 180;  // radians
  double cost_rel_eps = 1e-6;
  // Stop after this many consecutive rejected steps and keep the last
  // accepted estimate; 0 keeps halving until the update is small.
  int max_rejections = 1;
  std::uint64_t seed = 1;

  // Throws ValidationError.
  void Validate() const;
};

struct SampledPoint {
  int i = 0;
  int j = 0;
  InverseDepthPoint uvq;
  double z_mm = 0.0;

  // Throws InvalidDepthError when z_mm <= 0.
  static SampledPoint FromPixel(int i, int j, double z_mm,
                                const Intrinsics& k);
};

enum class Direction : std::uint8_t { kAToB, kBToA };

struct Correspondence {
  SampledPoint a_point;       // in frame a
  SampledPoint b_point;       // in frame b
  InverseDepthPoint warped;   // a_point mapped into frame b by M_ab
  Eigen::Vector3d normal;     // unit normal at b_point, frame b
  double weight = 1.0;
  Direction direction = Direction::kAToB;

  // Signed distance in meters from `warped` to the plane through b_point.
  double Residual() const;
  // Derivative of Residual() with respect to (u, v, q) of `warped`.
  Eigen::Vector3d Gradient() const;
};

struct NormalSystem {
  Eigen::Matrix<double, Eigen::Dynamic, 6> k;
  Eigen::VectorXd w;
  Eigen::VectorXd y;

  int rows() const { return static_cast<int>(y.size()); }
};

struct WeightResult {
  double weight = 0.0;
  bool outlier = false;
};

// Wire-level records exchanged between the two roles. Depth values are raw
// 16-bit units; z == 0 marks an empty record.
using OctNormal = std::array<std::int16_t, 2>;

struct QueryRecord {
  std::int16_t i = 0;
  std::int16_t j = 0;
  std::uint16_t z = 0;
  bool operator==(const QueryRecord&) const = default;
};

struct MatchRecord {
  static constexpr std::uint8_t kNoMatch = 0xff;
  // Row-major index of the match inside the search window.
  std::uint8_t offset = kNoMatch;
  std::uint16_t z = 0;
  OctNormal normal{};
  bool operator==(const MatchRecord&) const = default;
};

struct SampleRecord {
  std::uint16_t i = 0;
  std::uint16_t j = 0;
  std::uint16_t z = 0;
  OctNormal normal{};
  bool operator==(const SampleRecord&) const = default;
};

OctNormal EncodeNormal(const Eigen::Vector3d& n);
Eigen::Vector3d DecodeNormal(const OctNormal& e);

// Stratified uniform sampling over valid pixels, deterministic per seed.
// Throws InsufficientDataError when fewer than n pixels are valid.
std::vector<SampledPoint> SamplePoints(const DepthImage& depth,
                                       const Intrinsics& k, int n,
                                       std::uint64_t seed);

// Total least squares plane over the valid 5x5 neighborhood, oriented toward
// the camera. Throws NoNormalError on degenerate neighborhoods.
Eigen::Vector3d EstimateNormal(const DepthImage& depth, int i, int j,
                               const Intrinsics& k);

// Project-and-walk: searches the window x window neighborhood of the query
// pixel (query expressed in the target frame) for the valid pixel whose 3-D
// point is nearest to the query point.
std::optional<SampledPoint> FindCorrespondence(const SampledPoint& query,
                                               const DepthImage& target,
                                               const Intrinsics& k,
                                               int window);

// Asymmetric weight; depths and c in millimeters.
WeightResult ComputeWeight(double z_a, double z_b, double c);

// d(u_b, v_b, q_b)/d(alpha) at the warped point p.
Eigen::Matrix<double, 3, 6> InverseDepthJacobian(const InverseDepthPoint& p);

// Rows K, weights W and residual targets y. Throws UnderdeterminedError
// with fewer than six correspondences.
NormalSystem AssembleSystem(std::span<const Correspondence> correspondences);

// b = (K^T W K)^-1 K^T W y. Throws DegenerateGeometryError when the normal
// matrix is singular or its condition number reaches 1e12.
MotionVector SolveMotion(const NormalSystem& system);

// sum (w r)^2 over all correspondences.
double BidirectionalCost(std::span<const Correspondence> correspondences);

// Fills weights from ComputeWeight with c = mean |z_a - z_b| (floored at
// 1 mm). Returns the number of outliers.
int AssignWeights(std::span<Correspondence> correspondences);

// Role b: owns Z_b.
class IcpResponder {
 public:
  IcpResponder(DepthImage depth, const Intrinsics& k, const IcpConfig& config);

  // Own samples plus the normal at each; records whose normal cannot be
  // estimated carry z = 0.
  const std::vector<SampleRecord>& samples() const { return samples_; }

  std::vector<MatchRecord> Answer(std::span<const QueryRecord> queries) const;

 private:
  DepthImage depth_;
  Intrinsics k_;
  IcpConfig config_;
  std::vector<SampleRecord> samples_;
};

struct IterationTrace {
  double cost = 0.0;
  int rows = 0;
  int outliers = 0;
  double update_translation = 0.0;  // meters
  double update_rotation = 0.0;     // radians
  // False when the scored estimate had a higher mean cost per row than the
  // last accepted one; the step was then halved instead of re-solved.
  bool accepted = true;
};

struct IcpResult {
  RigidTransform pose;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationTrace> trace;
};

// Role a: owns Z_a and the estimate.
class IcpEstimator {
 public:
  IcpEstimator(DepthImage depth, const Intrinsics& k, const IcpConfig& config,
               const RigidTransform& initial = RigidTransform::Identity());

  void SetPeerSamples(std::vector<SampleRecord> samples);

  // Own samples warped into frame b by the current estimate.
  std::vector<QueryRecord> Queries() const;

  // One iteration: builds both correspondence sets and scores the current
  // estimate. An estimate that does not raise the mean cost per row is
  // accepted and a new step M_ab <- exp(s b) M_ab is solved from it;
  // otherwise s is halved and applied to the last accepted estimate. Throws
  // InsufficientDataError or DegenerateGeometryError; the estimate is left
  // untouched in that case.
  IterationTrace Step(std::span<const MatchRecord> matches);

  // Correspondences for the current estimate (both directions).
  std::vector<Correspondence> BuildCorrespondences(
      std::span<const MatchRecord> matches) const;

  const RigidTransform& pose() const { return pose_; }
  bool converged() const { return converged_; }
  int iterations() const { return static_cast<int>(trace_.size()); }
  bool done() const {
    return converged_ || iterations() >= config_.max_iterations;
  }
  // Converged estimate, or the last accepted estimate otherwise.
  IcpResult Result() const;

 private:
  DepthImage depth_;
  Intrinsics k_;
  IcpConfig config_;
  std::vector<SampledPoint> samples_;
  std::vector<SampleRecord> peer_samples_;
  RigidTransform pose_;
  bool converged_ = false;
  std::vector<IterationTrace> trace_;
  RigidTransform accepted_pose_;
  double accepted_score_ = -1.0;
  MotionVector step_;
  double step_scale_ = 1.0;
  int rejections_ = 0;
};

// Quantizes `point` (frame of the source image) warped by `m` into a query
// on the target image grid. Returns an empty record (z = 0) when the point
// lands behind the camera or out of the 16-bit range.
QueryRecord MakeQuery(const RigidTransform& m, const SampledPoint& point,
                      const Intrinsics& k);

// Role-b handling of one query: nearest neighbor plus its normal.
MatchRecord AnswerQuery(const QueryRecord& query, const DepthImage& target,
                        const Intrinsics& k, int window);

// Both frames in one process.
IcpResult RunIcpLocal(const DepthImage& z_a, const DepthImage& z_b,
                      const Intrinsics& k, const IcpConfig& config);

// Seed used by role b for its own samples.
std::uint64_t PeerSeed(std::uint64_t seed);

}  // namespace rprr

#endif  // RPRR_ICP_H_

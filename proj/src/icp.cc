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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "rprr/errors.h"

namespace rprr {

namespace {

constexpr int kNormalWindow = 5;
// Neighbors further than this fraction of the center depth are treated as a
// different surface when fitting normals.
constexpr double kNormalDepthGate = 0.05;
constexpr double kMaxConditionNumber = 1e12;
constexpr double kMinMeanDepthDifferenceMm = 1.0;

double SignOf(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

void IcpConfig::Validate() const {
  if (n_samples < 6) throw ValidationError("icp: n_samples must be >= 6");
  if (max_iterations < 1) {
    throw ValidationError("icp: max_iterations must be >= 1");
  }
  if (neighborhood < 1 || neighborhood % 2 == 0 || neighborhood > 15) {
    throw ValidationError("icp: neighborhood must be odd and at most 15");
  }
  if (max_rejections < 0) {
    throw ValidationError("icp: max_rejections must be >= 0");
  }
  if (!(translation_eps > 0) || !(rotation_eps > 0) || !(cost_rel_eps > 0)) {
    throw ValidationError("icp: convergence thresholds must be positive");
  }
}

std::uint64_t PeerSeed(std::uint64_t seed) {
  return seed ^ 0x9e3779b97f4a7c15ULL;
}

SampledPoint SampledPoint::FromPixel(int i, int j, double z_mm,
                                     const Intrinsics& k) {
  return {i, j, PixelToUvq(i, j, z_mm, k), z_mm};
}

double Correspondence::Residual() const {
  return normal.dot(warped.euclidean() - b_point.uvq.euclidean());
}

Eigen::Vector3d Correspondence::Gradient() const {
  const double q = warped.q;
  const double projected =
      normal.x() * warped.u + normal.y() * warped.v + normal.z();
  return {normal.x() / q, normal.y() / q, -projected / (q * q)};
}

OctNormal EncodeNormal(const Eigen::Vector3d& n) {
  const double l1 = std::abs(n.x()) + std::abs(n.y()) + std::abs(n.z());
  double x = n.x() / l1;
  double y = n.y() / l1;
  if (n.z() < 0.0) {
    const double fx = (1.0 - std::abs(y)) * SignOf(x);
    const double fy = (1.0 - std::abs(x)) * SignOf(y);
    x = fx;
    y = fy;
  }
  return {static_cast<std::int16_t>(std::lround(x * 32767.0)),
          static_cast<std::int16_t>(std::lround(y * 32767.0))};
}

Eigen::Vector3d DecodeNormal(const OctNormal& e) {
  double x = e[0] / 32767.0;
  double y = e[1] / 32767.0;
  const double z = 1.0 - std::abs(x) - std::abs(y);
  if (z < 0.0) {
    const double fx = (1.0 - std::abs(y)) * SignOf(x);
    const double fy = (1.0 - std::abs(x)) * SignOf(y);
    x = fx;
    y = fy;
  }
  return Eigen::Vector3d(x, y, z).normalized();
}

std::vector<SampledPoint> SamplePoints(const DepthImage& depth,
                                       const Intrinsics& k, int n,
                                       std::uint64_t seed) {
  std::vector<std::size_t> valid;
  const auto& s = depth.samples();
  for (std::size_t idx = 0; idx < s.size(); ++idx) {
    if (s[idx] != 0) valid.push_back(idx);
  }
  if (n <= 0 || valid.size() < static_cast<std::size_t>(n)) {
    throw InsufficientDataError("need " + std::to_string(n) +
                                " valid depth pixels, have " +
                                std::to_string(valid.size()));
  }
  std::mt19937_64 rng(seed);
  std::vector<SampledPoint> out;
  out.reserve(n);
  const std::size_t total = valid.size();
  for (int stratum = 0; stratum < n; ++stratum) {
    const std::size_t lo = total * stratum / n;
    const std::size_t hi = total * (stratum + 1) / n;
    const std::size_t idx = valid[lo + rng() % (hi - lo)];
    const int i = static_cast<int>(idx % depth.width());
    const int j = static_cast<int>(idx / depth.width());
    out.push_back(SampledPoint::FromPixel(i, j, k.ToMillimeters(s[idx]), k));
  }
  return out;
}

Eigen::Vector3d EstimateNormal(const DepthImage& depth, int i, int j,
                               const Intrinsics& k) {
  if (!depth.contains(i, j) || !depth.valid(i, j)) {
    throw NoNormalError("normal requested at an invalid pixel");
  }
  const double z_center = k.ToMillimeters(depth.at(i, j));
  const Eigen::Vector3d center =
      PixelToUvq(i, j, z_center, k).euclidean();
  const int h = kNormalWindow / 2;

  std::vector<Eigen::Vector3d> points;
  points.reserve(kNormalWindow * kNormalWindow);
  for (int jj = j - h; jj <= j + h; ++jj) {
    for (int ii = i - h; ii <= i + h; ++ii) {
      if (!depth.contains(ii, jj) || !depth.valid(ii, jj)) continue;
      const double z = k.ToMillimeters(depth.at(ii, jj));
      if (std::abs(z - z_center) > kNormalDepthGate * z_center) continue;
      points.push_back(PixelToUvq(ii, jj, z, k).euclidean());
    }
  }
  if (points.size() < 3) {
    throw NoNormalError("fewer than three valid neighbors");
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
  if (!(lambda(1) > 1e-12 * lambda(2)) || !(lambda(2) > 0.0)) {
    throw NoNormalError("collinear neighborhood");
  }
  Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
  if (n.dot(center) > 0.0) n = -n;
  return n;
}

std::optional<SampledPoint> FindCorrespondence(const SampledPoint& query,
                                               const DepthImage& target,
                                               const Intrinsics& k,
                                               int window) {
  if (!target.contains(query.i, query.j) || !(query.z_mm > 0.0)) {
    return std::nullopt;
  }
  const Eigen::Vector3d x_query = query.uvq.euclidean();
  const int h = window / 2;
  double best = std::numeric_limits<double>::infinity();
  std::optional<SampledPoint> match;
  for (int jj = std::max(0, query.j - h);
       jj <= std::min(target.height() - 1, query.j + h); ++jj) {
    for (int ii = std::max(0, query.i - h);
         ii <= std::min(target.width() - 1, query.i + h); ++ii) {
      if (!target.valid(ii, jj)) continue;
      const SampledPoint candidate = SampledPoint::FromPixel(
          ii, jj, k.ToMillimeters(target.at(ii, jj)), k);
      const double d2 = (candidate.uvq.euclidean() - x_query).squaredNorm();
      if (d2 < best) {
        best = d2;
        match = candidate;
      }
    }
  }
  return match;
}

WeightResult ComputeWeight(double z_a, double z_b, double c) {
  if (!(c > 0.0)) return {0.0, true};
  const double diff = z_a - z_b;
  const double denominator = z_b <= z_a ? c + diff : c + diff * diff;
  if (!(denominator > 0.0)) return {0.0, true};
  return {c / denominator, false};
}

Eigen::Matrix<double, 3, 6> InverseDepthJacobian(const InverseDepthPoint& p) {
  const double u = p.u, v = p.v, q = p.q;
  Eigen::Matrix<double, 3, 6> j;
  j << q, 0.0, -u * q, -u * v, 1.0 + u * u, -v,  //
      0.0, q, -v * q, -1.0 - v * v, v * u, u,    //
      0.0, 0.0, -q * q, -v * q, u * q, 0.0;
  return j;
}

NormalSystem AssembleSystem(std::span<const Correspondence> correspondences) {
  const int n = static_cast<int>(correspondences.size());
  if (n < 6) {
    throw UnderdeterminedError("only " + std::to_string(n) +
                               " correspondences; at least 6 required");
  }
  NormalSystem s;
  s.k.resize(n, 6);
  s.w.resize(n);
  s.y.resize(n);
  for (int r = 0; r < n; ++r) {
    const Correspondence& c = correspondences[r];
    s.k.row(r) = c.Gradient().transpose() * InverseDepthJacobian(c.warped);
    s.w(r) = c.weight;
    s.y(r) = -c.Residual();
  }
  return s;
}

MotionVector SolveMotion(const NormalSystem& system) {
  const Eigen::Matrix<double, 6, 6> h =
      system.k.transpose() * system.w.asDiagonal() * system.k;
  const Vector6d g = system.k.transpose() * system.w.asDiagonal() * system.y;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(h);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(5);
  if (!(lo > 0.0) || !(hi / lo < kMaxConditionNumber)) {
    throw DegenerateGeometryError(
        "normal equations are singular or ill-conditioned");
  }
  return MotionVector(h.ldlt().solve(g));
}

double BidirectionalCost(std::span<const Correspondence> correspondences) {
  double cost = 0.0;
  for (const Correspondence& c : correspondences) {
    const double e = c.weight * c.Residual();
    cost += e * e;
  }
  return cost;
}

int AssignWeights(std::span<Correspondence> correspondences) {
  if (correspondences.empty()) return 0;
  double sum = 0.0;
  for (const Correspondence& c : correspondences) {
    sum += std::abs(1000.0 / c.warped.q - c.b_point.z_mm);
  }
  const double mean = std::max(
      kMinMeanDepthDifferenceMm,
      sum / static_cast<double>(correspondences.size()));
  int outliers = 0;
  for (Correspondence& c : correspondences) {
    const WeightResult w =
        ComputeWeight(1000.0 / c.warped.q, c.b_point.z_mm, mean);
    c.weight = w.weight;
    outliers += w.outlier;
  }
  return outliers;
}

QueryRecord MakeQuery(const RigidTransform& m, const SampledPoint& point,
                      const Intrinsics& k) {
  const Eigen::Vector3d x = m * point.uvq.euclidean();
  if (!(x.z() > 0.0)) return {};
  const double i = k.fx * x.x() / x.z() + k.ic;
  const double j = k.fy * x.y() / x.z() + k.jc;
  const double lim = std::numeric_limits<std::int16_t>::max();
  if (!(std::abs(i) < lim) || !(std::abs(j) < lim)) return {};
  const std::uint16_t z = k.FromMillimeters(1000.0 * x.z());
  if (z == 0) return {};
  return {static_cast<std::int16_t>(std::lround(i)),
          static_cast<std::int16_t>(std::lround(j)), z};
}

MatchRecord AnswerQuery(const QueryRecord& query, const DepthImage& target,
                        const Intrinsics& k, int window) {
  if (query.z == 0) return {};
  const SampledPoint q =
      SampledPoint::FromPixel(query.i, query.j, k.ToMillimeters(query.z), k);
  const auto match = FindCorrespondence(q, target, k, window);
  if (!match) return {};
  Eigen::Vector3d normal;
  try {
    normal = EstimateNormal(target, match->i, match->j, k);
  } catch (const NoNormalError&) {
    return {};
  }
  const int h = window / 2;
  MatchRecord r;
  r.offset = static_cast<std::uint8_t>((match->j - query.j + h) * window +
                                       (match->i - query.i + h));
  r.z = target.at(match->i, match->j);
  r.normal = EncodeNormal(normal);
  return r;
}

IcpResponder::IcpResponder(DepthImage depth, const Intrinsics& k,
                           const IcpConfig& config)
    : depth_(std::move(depth)), k_(k), config_(config) {
  config_.Validate();
  const auto points =
      SamplePoints(depth_, k_, config_.n_samples, PeerSeed(config_.seed));
  samples_.reserve(points.size());
  for (const SampledPoint& p : points) {
    SampleRecord r;
    r.i = static_cast<std::uint16_t>(p.i);
    r.j = static_cast<std::uint16_t>(p.j);
    try {
      r.normal = EncodeNormal(EstimateNormal(depth_, p.i, p.j, k_));
      r.z = depth_.at(p.i, p.j);
    } catch (const NoNormalError&) {
      r.z = 0;
    }
    samples_.push_back(r);
  }
}

std::vector<MatchRecord> IcpResponder::Answer(
    std::span<const QueryRecord> queries) const {
  std::vector<MatchRecord> out;
  out.reserve(queries.size());
  for (const QueryRecord& q : queries) {
    out.push_back(AnswerQuery(q, depth_, k_, config_.neighborhood));
  }
  return out;
}

IcpEstimator::IcpEstimator(DepthImage depth, const Intrinsics& k,
                           const IcpConfig& config,
                           const RigidTransform& initial)
    : depth_(std::move(depth)),
      k_(k),
      config_(config),
      pose_(initial),
      accepted_pose_(initial) {
  config_.Validate();
  samples_ = SamplePoints(depth_, k_, config_.n_samples, config_.seed);
}

void IcpEstimator::SetPeerSamples(std::vector<SampleRecord> samples) {
  peer_samples_ = std::move(samples);
}

std::vector<QueryRecord> IcpEstimator::Queries() const {
  std::vector<QueryRecord> out;
  out.reserve(samples_.size());
  for (const SampledPoint& p : samples_) {
    out.push_back(MakeQuery(pose_, p, k_));
  }
  return out;
}

std::vector<Correspondence> IcpEstimator::BuildCorrespondences(
    std::span<const MatchRecord> matches) const {
  if (matches.size() != samples_.size()) {
    throw ProtocolError("match count does not equal sample count");
  }
  std::vector<Correspondence> out;
  out.reserve(samples_.size() + peer_samples_.size());
  const int window = config_.neighborhood;
  const int h = window / 2;

  // a -> b: own samples matched inside Z_b by the responder.
  const std::vector<QueryRecord> queries = Queries();
  for (std::size_t n = 0; n < samples_.size(); ++n) {
    const MatchRecord& m = matches[n];
    if (m.offset == MatchRecord::kNoMatch || m.z == 0) continue;
    if (m.offset >= window * window) {
      throw ProtocolError("match offset outside the search window");
    }
    const int ti = queries[n].i + m.offset % window - h;
    const int tj = queries[n].j + m.offset / window - h;
    Correspondence c;
    c.direction = Direction::kAToB;
    c.a_point = samples_[n];
    c.b_point = SampledPoint::FromPixel(ti, tj, k_.ToMillimeters(m.z), k_);
    c.normal = DecodeNormal(m.normal);
    try {
      c.warped = Se3ApplyUvq(pose_, c.a_point.uvq);
    } catch (const BehindCameraError&) {
      continue;
    }
    out.push_back(c);
  }

  // b -> a: the responder's samples matched inside Z_a.
  const RigidTransform inverse = pose_.inverse();
  for (const SampleRecord& s : peer_samples_) {
    if (s.z == 0) continue;
    const SampledPoint b_point =
        SampledPoint::FromPixel(s.i, s.j, k_.ToMillimeters(s.z), k_);
    const QueryRecord q = MakeQuery(inverse, b_point, k_);
    if (q.z == 0) continue;
    const auto match = FindCorrespondence(
        SampledPoint::FromPixel(q.i, q.j, k_.ToMillimeters(q.z), k_), depth_,
        k_, window);
    if (!match) continue;
    Correspondence c;
    c.direction = Direction::kBToA;
    c.a_point = *match;
    c.b_point = b_point;
    c.normal = DecodeNormal(s.normal);
    try {
      c.warped = Se3ApplyUvq(pose_, c.a_point.uvq);
    } catch (const BehindCameraError&) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

IterationTrace IcpEstimator::Step(std::span<const MatchRecord> matches) {
  std::vector<Correspondence> correspondences = BuildCorrespondences(matches);
  if (correspondences.size() < 6) {
    throw InsufficientDataError(
        "fewer than 6 correspondences survived matching");
  }
  IterationTrace t;
  t.outliers = AssignWeights(correspondences);
  t.rows = static_cast<int>(correspondences.size());
  t.cost = BidirectionalCost(correspondences);
  const double score = t.cost / t.rows;

  double previous = -1.0;
  if (accepted_score_ < 0.0 || score <= accepted_score_) {
    step_ = SolveMotion(AssembleSystem(correspondences));
    previous = accepted_score_;
    accepted_pose_ = pose_;
    accepted_score_ = score;
    step_scale_ = std::min(1.0, 2.0 * step_scale_);
    rejections_ = 0;
  } else {
    t.accepted = false;
    step_scale_ *= 0.5;
    ++rejections_;
  }
  if (config_.max_rejections > 0 && rejections_ >= config_.max_rejections) {
    pose_ = accepted_pose_;
    converged_ = true;
    t.update_translation = 0.0;
    t.update_rotation = 0.0;
    trace_.push_back(t);
    return t;
  }
  const RigidTransform update =
      Se3Exp(MotionVector(step_scale_ * step_.alpha()));
  t.update_translation = update.translation().norm();
  t.update_rotation = update.angle();

  const bool small_update = t.update_translation < config_.translation_eps &&
                            t.update_rotation < config_.rotation_eps;
  const bool flat_cost =
      previous >= 0.0 &&
      (previous == score ||
       std::abs(previous - score) < config_.cost_rel_eps * previous);
  pose_ = update * accepted_pose_;
  converged_ = small_update || flat_cost;
  trace_.push_back(t);
  return t;
}

IcpResult IcpEstimator::Result() const {
  IcpResult r;
  r.converged = converged_;
  r.iterations = iterations();
  r.trace = trace_;
  r.pose = converged_ ? pose_ : accepted_pose_;
  return r;
}

IcpResult RunIcpLocal(const DepthImage& z_a, const DepthImage& z_b,
                      const Intrinsics& k, const IcpConfig& config) {
  IcpEstimator estimator(z_a, k, config);
  const IcpResponder responder(z_b, k, config);
  estimator.SetPeerSamples(responder.samples());
  while (!estimator.done()) {
    estimator.Step(responder.Answer(estimator.Queries()));
  }
  return estimator.Result();
}

}  // namespace rprr

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

// Full two-sensor session: distributed pose estimation between the sensors,
// redundancy analysis, payload coding, and reconstruction at the station.
// Three tasks (sensor a, sensor b, station) talk only through transport
// links: a<->b, a->station and b->station.

#ifndef RPRR_SESSION_H_
#define RPRR_SESSION_H_

#include <cstdint>
#include <vector>

#include "rprr/geometry.h"
#include "rprr/icp.h"
#include "rprr/metrics.h"
#include "rprr/postproc.h"
#include "rprr/scene.h"
#include "rprr/transport.h"

namespace rprr {

struct SessionConfig {
  IcpConfig icp;
  int color_quality = 50;
  // B_p takes blocks with at most this many warped pixels.
  int empty_threshold = 32;
  // Pose estimation runs on depth decimated by the smallest integer factor
  // that brings the width down to at most this many pixels; 0 disables it.
  int icp_max_width = 160;
  bool postprocess = true;
  FilterConfig filter;
  TransportKind transport = TransportKind::kInProcess;
  // Sensor b sends the complete frames and sensor a the payload.
  bool swap_roles = false;

  // Throws ValidationError.
  void Validate() const;
  int IcpFactor(int width) const;
};

// Wire bytes per stage, including the 16-byte frame headers.
struct TransmissionRecord {
  Scheme scheme = Scheme::kRprr;
  std::uint64_t icp_messages = 0;
  std::uint64_t block_coords = 0;
  std::uint64_t container_a = 0;
  std::uint64_t container_b = 0;
  // Coded section sizes summed over both containers.
  std::uint64_t depth_bytes = 0;
  std::uint64_t color_bytes = 0;
  int prediction_blocks = 0;
  int validation_blocks = 0;
  int payload_blocks = 0;
  int iterations = 0;
  bool converged = false;
  // ICP did not converge; both frames were sent complete.
  bool fallback = false;
  StageTimings timings;

  std::uint64_t total() const {
    return icp_messages + block_coords + container_a + container_b;
  }
};

struct SessionOutput {
  // Reconstructed view of the payload sensor (b unless roles are swapped).
  DepthImage depth;
  ColorImage color;
  RigidTransform m_ab;
  std::vector<std::uint8_t> transmitted;
  FilterStats filter;
  TransmissionRecord record;
  // Bytes the transports saw, summed over every link end that sent.
  std::uint64_t observed_bytes = 0;
};

SessionOutput RunSession(const ScenePair& pair, const SessionConfig& config);

// Both complete frames go to the station; no pose estimation.
SessionOutput RunIndependent(const ScenePair& pair, int color_quality,
                             TransportKind transport = TransportKind::kInProcess);

}  // namespace rprr

#endif  // RPRR_SESSION_H_

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

#ifndef RPRR_ICP_DISTRIBUTED_H_
#define RPRR_ICP_DISTRIBUTED_H_

#include <cstdint>
#include <optional>

#include "rprr/icp.h"
#include "rprr/transport.h"
#include "rprr/wire.h"

namespace rprr {

// ABORT reason codes.
inline constexpr std::uint8_t kAbortIcpFailed = 1;
inline constexpr std::uint8_t kAbortProtocol = 2;
inline constexpr std::uint8_t kAbortInternal = 3;

// Role a: holds Z_a, owns the estimate, and solves every iteration.
// Estimation failures are announced to the peer with an ABORT before being
// rethrown.
IcpResult RunIcpRoleA(Endpoint& link, const DepthImage& z_a,
                      const Intrinsics& k, const IcpConfig& config);

// Role b: answers queries against Z_b. Returns the final estimate announced
// by role a, or nothing when role a gave up on estimation.
std::optional<PoseReport> RunIcpRoleB(Endpoint& link, const DepthImage& z_b,
                                      const Intrinsics& k,
                                      const IcpConfig& config);

struct DistributedIcpRun {
  IcpResult result;
  LinkCounters a;
  LinkCounters b;
};

// Runs both roles on separate threads over a fresh link of `kind`.
DistributedIcpRun RunIcpDistributed(const DepthImage& z_a,
                                    const DepthImage& z_b, const Intrinsics& k,
                                    const IcpConfig& config,
                                    TransportKind kind);

}  // namespace rprr

#endif  // RPRR_ICP_DISTRIBUTED_H_

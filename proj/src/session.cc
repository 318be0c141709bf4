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

#include "rprr/session.h"

#include <chrono>
#include <exception>
#include <functional>
#include <future>
#include <mutex>
#include <optional>

#include "rprr/color_codec.h"
#include "rprr/container.h"
#include "rprr/depth_codec.h"
#include "rprr/errors.h"
#include "rprr/icp_distributed.h"
#include "rprr/redundancy.h"

namespace rprr {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

BlockSet FullGrid(int width, int height) {
  BlockSet all = BlockSet::ForImage(width, height);
  for (int by = 0; by < all.blocks_y(); ++by) {
    for (int bx = 0; bx < all.blocks_x(); ++bx) all.insert({bx, by});
  }
  return all;
}

ContainerParts FullFrameParts(const DepthImage& z, const ColorImage& c,
                              const Intrinsics& k, int quality,
                              const RigidTransform& m_ab) {
  ContainerParts p;
  p.flags = kFlagFullFrame;
  p.intrinsics_hash = k.Hash();
  p.m_ab = m_ab;
  p.blocks = FullGrid(z.width(), z.height());
  p.depth = EncodeDepth(FrameTiles(z));
  p.color = EncodeColor(c, quality);
  return p;
}

ContainerParts PayloadParts(const DepthImage& z, const ColorImage& c,
                            const BlockSet& set, const Intrinsics& k,
                            int quality, const RigidTransform& m_ab) {
  ContainerParts p;
  p.intrinsics_hash = k.Hash();
  p.m_ab = m_ab;
  p.blocks = set;
  if (!set.empty()) {
    const std::vector<PayloadBlock> payload = PayloadBlocks(z, c, set);
    p.depth = EncodeDepth(PayloadDepthTiles(payload));
    p.color = EncodeColor(PayloadCanvas(payload, z.width(), z.height()), quality,
                          PayloadMask(payload, z.width(), z.height()));
  }
  return p;
}

// Sends one message and adds the time spent to `seconds`.
void TimedSend(Endpoint& link, Message m, double& seconds) {
  const auto t0 = Clock::now();
  link.Send(std::move(m));
  seconds += Since(t0);
}

BlockSet ParseBlockSetMessage(const Message& m, const Intrinsics& k) {
  ExpectType(m, MessageType::kBlockSet);
  try {
    BlockSet set = BlockSet::FromBitmap(
        m.body, BlockSet::ForImage(k.width, k.height).blocks_x(),
        BlockSet::ForImage(k.width, k.height).blocks_y());
    if (static_cast<std::uint32_t>(set.size()) != m.count) throw ProtocolError("block set count disagrees with its bitmap");
    return set;
  } catch (const MalformedPayloadError& e) {
    throw ProtocolError(std::string("block set: ") + e.what());
  }
}

ContainerParts ReceiveContainer(Endpoint& link, const Intrinsics& k) {
  const Message m = link.Receive();
  ExpectType(m, MessageType::kContainer);
  ContainerParts p = UnpackContainer(m.body);
  if (p.intrinsics_hash != k.Hash()) {
    throw ProtocolError("container was made for different intrinsics");
  }
  return p;
}

struct DecodedFrame {
  DepthImage depth;
  ColorImage color;
};

DecodedFrame DecodeFullFrame(const ContainerParts& p, const Intrinsics& k) {
  if (!(p.flags & kFlagFullFrame) || p.blocks.size() != p.blocks.grid_size()) {
    throw ProtocolError("expected a complete frame");
  }
  DecodedFrame f{FrameFromTiles(DecodeDepth(p.depth), k.width, k.height),
                 DecodeColor(p.color)};
  if (f.color.width() != k.width || f.color.height() != k.height) {
    throw ProtocolError("decoded color frame has the wrong size");
  }
  return f;
}

std::vector<PayloadBlock> DecodePayload(const ContainerParts& p, const Intrinsics& k) {
  std::vector<PayloadBlock> blocks;
  if (p.blocks.empty()) return blocks;
  const std::vector<BlockCoord> coords = p.blocks.Coords();
  const std::vector<DepthTile> tiles = DecodeDepth(p.depth);
  if (tiles.size() != coords.size()) {
    throw ProtocolError("payload tile count disagrees with the block set");
  }
  const ColorImage canvas = DecodeColor(p.color);
  if (canvas.width() != k.width || canvas.height() != k.height) {
    throw ProtocolError("payload canvas has the wrong size");
  }
  blocks.resize(coords.size());
  for (std::size_t n = 0; n < coords.size(); ++n) {
    blocks[n].coord = coords[n];
    blocks[n].depth = tiles[n];
  }
  ExtractPayloadColor(canvas, blocks);
  return blocks;
}

// Runs the tasks concurrently. When one fails every link is closed so the
// others unblock; the first failure that is not a consequence of a closed
// link is rethrown.
void RunTasks(std::vector<std::function<void()>> tasks,
              const std::vector<Endpoint*>& links) {
  std::vector<std::future<void>> running;
  std::mutex mu;
  auto close_all = [&] {
    std::lock_guard lock(mu);
    for (Endpoint* e : links) e->Close();
  };
  for (auto& task : tasks) {
    running.push_back(std::async(std::launch::async, [&, task] {
      try {
        task();
      } catch (...) {
        close_all();
        throw;
      }
    }));
  }
  std::exception_ptr first, secondary;
  for (auto& f : running) {
    try {
      f.get();
    } catch (const SessionAbortError&) {
      if (!secondary) secondary = std::current_exception();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  if (secondary) std::rethrow_exception(secondary);
}

ScenePair Swapped(const ScenePair& p) {
  ScenePair s = p;
  std::swap(s.z_a, s.z_b);
  std::swap(s.c_a, s.c_b);
  if (p.ground_truth) s.ground_truth = p.ground_truth->inverse();
  return s;
}

}  // namespace

void SessionConfig::Validate() const {
  icp.Validate();
  filter.Validate();
  if (color_quality < 0 || color_quality > kMaxColorQuality) {
    throw ValidationError("color quality must be within 0..100");
  }
  if (empty_threshold < 0 || empty_threshold >= kBlockSize * kBlockSize) {
    throw ValidationError("empty-block threshold must be within 0..63");
  }
  if (icp_max_width < 0) throw ValidationError("icp_max_width must be >= 0");
}

int SessionConfig::IcpFactor(int width) const {
  if (icp_max_width == 0 || width <= icp_max_width) return 1;
  return (width + icp_max_width - 1) / icp_max_width;
}

SessionOutput RunSession(const ScenePair& input, const SessionConfig& config) {
  config.Validate();
  input.Validate();
  const ScenePair pair = config.swap_roles ? Swapped(input) : input;
  const Intrinsics& k = pair.intrinsics;
  const int q = config.color_quality;
  const int icp_factor = config.IcpFactor(k.width);
  const Intrinsics k_icp = k.Decimated(icp_factor);

  EndpointPair ab = MakePair(config.transport);
  EndpointPair as = MakePair(config.transport);
  EndpointPair bs = MakePair(config.transport);

  StageTimings time_a, time_b;
  IcpResult icp;
  bool fallback_a = false;
  int prediction_blocks = 0;
  int validation_blocks = 0;
  int payload_blocks = 0;
  std::uint64_t depth_a = 0, color_a = 0, depth_b = 0, color_b = 0;
  SessionOutput out;

  auto sensor_a = [&] {
    Endpoint& peer = *ab.first;
    auto t0 = Clock::now();
    try {
      icp = RunIcpRoleA(peer, Decimate(pair.z_a, icp_factor), k_icp, config.icp);
    } catch (const InsufficientDataError&) {
      fallback_a = true;
    } catch (const DegenerateGeometryError&) {
      fallback_a = true;
    }
    fallback_a = fallback_a || !icp.converged;
    if (!fallback_a) {
      const WarpResult warp = WarpImage(pair.z_a, pair.c_a, icp.pose, k);
      const BlockSet bp = PredictionSet(warp, config.empty_threshold);
      prediction_blocks = bp.size();
      time_a.pose_s = Since(t0);
      TimedSend(peer, MakeBlob(MessageType::kBlockSet, bp.ToBitmap(),
                               static_cast<std::uint32_t>(bp.size())),
                time_a.send_s);
    } else {
      time_a.pose_s = Since(t0);
    }
    t0 = Clock::now();
    const ContainerParts parts =
        FullFrameParts(pair.z_a, pair.c_a, k, q, RigidTransform::Identity());
    depth_a = parts.depth.size();
    color_a = parts.color.size();
    std::vector<std::uint8_t> bytes = PackContainer(parts);
    time_a.encode_s = Since(t0);
    TimedSend(*as.first, MakeBlob(MessageType::kContainer, std::move(bytes),
                                  static_cast<std::uint32_t>(parts.blocks.size())),
              time_a.send_s);
  };

  auto sensor_b = [&] {
    Endpoint& peer = *ab.second;
    auto t0 = Clock::now();
    const std::optional<PoseReport> report =
        RunIcpRoleB(peer, Decimate(pair.z_b, icp_factor), k_icp,
                    config.icp);
    ContainerParts parts;
    if (report && report->converged) {
      const BlockSet bp = ParseBlockSetMessage(peer.Receive(), k);
      const BlockSet bv = ValidationSet(pair.z_b, report->pose.inverse(), k);
      validation_blocks = bv.size();
      const BlockSet set = bp | bv;
      payload_blocks = set.size();
      time_b.pose_s = Since(t0);
      t0 = Clock::now();
      parts = PayloadParts(pair.z_b, pair.c_b, set, k, q, report->pose);
    } else {
      time_b.pose_s = Since(t0);
      t0 = Clock::now();
      parts = FullFrameParts(pair.z_b, pair.c_b, k, q,
                             report ? report->pose : RigidTransform::Identity());
      payload_blocks = parts.blocks.size();
    }
    depth_b = parts.depth.size();
    color_b = parts.color.size();
    std::vector<std::uint8_t> bytes = PackContainer(parts);
    time_b.encode_s = Since(t0);
    TimedSend(*bs.first, MakeBlob(MessageType::kContainer, std::move(bytes),
                                  static_cast<std::uint32_t>(parts.blocks.size())),
              time_b.send_s);
  };

  auto station = [&] {
    const DecodedFrame a = DecodeFullFrame(ReceiveContainer(*as.second, k), k);
    const ContainerParts b = ReceiveContainer(*bs.second, k);
    out.m_ab = b.m_ab;
    if (b.flags & kFlagFullFrame) {
      DecodedFrame f = DecodeFullFrame(b, k);
      out.depth = std::move(f.depth);
      out.color = std::move(f.color);
      out.transmitted.assign(static_cast<std::size_t>(k.width) * k.height, 1);
      return;
    }
    const std::vector<PayloadBlock> payload = DecodePayload(b, k);
    Reconstruction r = StitchReconstruct(a.depth, a.color, b.m_ab, k, payload);
    if (config.postprocess) {
      out.filter = PostProcess({r.depth, r.color, r.transmitted}, a.color,
                               b.m_ab, k, config.filter);
    }
    out.depth = std::move(r.depth);
    out.color = std::move(r.color);
    out.transmitted = std::move(r.transmitted);
  };

  RunTasks({sensor_a, sensor_b, station},
           {ab.first.get(), ab.second.get(), as.first.get(), as.second.get(),
            bs.first.get(), bs.second.get()});

  TransmissionRecord& rec = out.record;
  rec.scheme = Scheme::kRprr;
  const LinkCounters& ab_a = ab.first->counters();
  const LinkCounters& ab_b = ab.second->counters();
  rec.block_coords = ab_a.sent(MessageType::kBlockSet);
  rec.icp_messages = ab_a.bytes_sent + ab_b.bytes_sent - rec.block_coords;
  rec.container_a = as.first->counters().bytes_sent;
  rec.container_b = bs.first->counters().bytes_sent;
  rec.depth_bytes = depth_a + depth_b;
  rec.color_bytes = color_a + color_b;
  rec.prediction_blocks = prediction_blocks;
  rec.validation_blocks = validation_blocks;
  rec.payload_blocks = payload_blocks;
  rec.iterations = icp.iterations;
  rec.converged = icp.converged && !fallback_a;
  rec.fallback = fallback_a;
  rec.timings = {time_a.pose_s + time_b.pose_s, time_a.encode_s + time_b.encode_s,
                 time_a.send_s + time_b.send_s};
  out.observed_bytes = ab_a.bytes_received + ab_b.bytes_received +
                       as.second->counters().bytes_received +
                       bs.second->counters().bytes_received;
  return out;
}

SessionOutput RunIndependent(const ScenePair& pair, int color_quality,
                             TransportKind transport) {
  pair.Validate();
  if (color_quality < 0 || color_quality > kMaxColorQuality) {
    throw ValidationError("color quality must be within 0..100");
  }
  const Intrinsics& k = pair.intrinsics;
  EndpointPair as = MakePair(transport);
  EndpointPair bs = MakePair(transport);
  StageTimings time_a, time_b;
  std::uint64_t depth_a = 0, color_a = 0, depth_b = 0, color_b = 0;
  SessionOutput out;

  auto sensor = [&](const DepthImage& z, const ColorImage& c, Endpoint& link,
                    StageTimings& t, std::uint64_t& depth, std::uint64_t& color) {
    const auto t0 = Clock::now();
    const ContainerParts parts =
        FullFrameParts(z, c, k, color_quality, RigidTransform::Identity());
    depth = parts.depth.size();
    color = parts.color.size();
    std::vector<std::uint8_t> bytes = PackContainer(parts);
    t.encode_s = Since(t0);
    TimedSend(link, MakeBlob(MessageType::kContainer, std::move(bytes),
                             static_cast<std::uint32_t>(parts.blocks.size())),
              t.send_s);
  };
  auto station = [&] {
    DecodeFullFrame(ReceiveContainer(*as.second, k), k);
    DecodedFrame b = DecodeFullFrame(ReceiveContainer(*bs.second, k), k);
    out.depth = std::move(b.depth);
    out.color = std::move(b.color);
    out.transmitted.assign(static_cast<std::size_t>(k.width) * k.height, 1);
  };
  RunTasks({[&] { sensor(pair.z_a, pair.c_a, *as.first, time_a, depth_a, color_a); },
            [&] { sensor(pair.z_b, pair.c_b, *bs.first, time_b, depth_b, color_b); },
            station},
           {as.first.get(), as.second.get(), bs.first.get(), bs.second.get()});

  TransmissionRecord& rec = out.record;
  rec.scheme = Scheme::kIndependent;
  rec.container_a = as.first->counters().bytes_sent;
  rec.container_b = bs.first->counters().bytes_sent;
  rec.depth_bytes = depth_a + depth_b;
  rec.color_bytes = color_a + color_b;
  rec.payload_blocks = BlockSet::ForImage(k.width, k.height).grid_size();
  rec.timings = {0.0, time_a.encode_s + time_b.encode_s, time_a.send_s + time_b.send_s};
  out.observed_bytes = as.second->counters().bytes_received +
                       bs.second->counters().bytes_received;
  return out;
}

}  // namespace rprr

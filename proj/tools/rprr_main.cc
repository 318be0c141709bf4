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

// Command-line front end: pose, encode, decode, session, independent, synth,
// experiment.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rprr/color_codec.h"
#include "rprr/container.h"
#include "rprr/dataset.h"
#include "rprr/depth_codec.h"
#include "rprr/errors.h"
#include "rprr/experiment.h"
#include "rprr/icp_distributed.h"
#include "rprr/image_io.h"
#include "rprr/session.h"
#include "rprr/synthetic.h"

namespace {

using namespace rprr;

// Where a scene pair comes from.
struct SceneSource {
  std::string scene = "room-yaw-left";
  int width = 640;
  int height = 480;
  std::string dataset;
  std::string format = "tum";
  int first = 0;
  int gap = 10;
};

struct Common {
  std::uint64_t seed = 1;
  std::string transport = "inprocess";
  int quality = 50;
  double ghost_delta_mm = FilterConfig{}.ghost_range_delta_mm;
  double ghost_majority = FilterConfig{}.ghost_majority;
  int crack_max_window = FilterConfig{}.crack_max_window;
  int empty_threshold = SessionConfig{}.empty_threshold;
  int icp_max_width = SessionConfig{}.icp_max_width;
  bool no_postprocess = false;
};

void AddSource(CLI::App* cmd, SceneSource& s) {
  cmd->add_option("--scene", s.scene,
                  "Synthetic scene: one of the six standard scenes, 'occlusion' or 'plane'")
      ->capture_default_str();
  cmd->add_option("--width", s.width, "Synthetic image width")->capture_default_str();
  cmd->add_option("--height", s.height, "Synthetic image height")->capture_default_str();
  cmd->add_option("--dataset", s.dataset, "Scene pair directory (overrides --scene)");
  cmd->add_option("--format", s.format, "Dataset layout: tum or raw")->capture_default_str();
  cmd->add_option("--first", s.first, "Frame a index (tum)")->capture_default_str();
  cmd->add_option("--gap", s.gap, "Frame b = first + gap (tum)")->capture_default_str();
}

void AddSeed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for sampling and scene noise (RPRR_SEED overrides)")
      ->capture_default_str();
}

void AddTransport(CLI::App* cmd, Common& c) {
  cmd->add_option("--transport", c.transport, "inprocess or socket")
      ->check(CLI::IsMember({"inprocess", "socket"}))
      ->capture_default_str();
}

void AddSessionOptions(CLI::App* cmd, Common& c) {
  cmd->add_option("--color-quality", c.quality, "Color quality 0..100")
      ->check(CLI::Range(0, 100))
      ->capture_default_str();
  cmd->add_option("--ghost-delta-mm", c.ghost_delta_mm, "Ghost range threshold")
      ->capture_default_str();
  cmd->add_option("--ghost-majority", c.ghost_majority, "Ghost majority fraction")
      ->capture_default_str();
  cmd->add_option("--crack-max-window", c.crack_max_window, "Largest crack window (odd)")
      ->capture_default_str();
  cmd->add_option("--empty-threshold", c.empty_threshold,
                  "Blocks with at most this many warped pixels are sent")
      ->capture_default_str();
  cmd->add_option("--icp-max-width", c.icp_max_width,
                  "Pose estimation grid width limit (0: full resolution)")
      ->capture_default_str();
  cmd->add_flag("--no-postprocess", c.no_postprocess, "Skip crack and ghost filtering");
}

std::uint64_t EffectiveSeed(const Common& c) {
  if (const char* env = std::getenv("RPRR_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string("RPRR_SEED is not a number: '") + env + "'");
    }
  }
  return c.seed;
}

TransportKind Transport(const Common& c) {
  return c.transport == "socket" ? TransportKind::kSocket : TransportKind::kInProcess;
}

ScenePair LoadSource(const SceneSource& s, std::uint64_t seed) {
  if (!s.dataset.empty()) {
    LoadOptions o;
    o.first = s.first;
    o.gap = s.gap;
    return LoadScenePair(s.dataset, ParseDatasetFormat(s.format), o);
  }
  const Intrinsics k = Intrinsics::ScaledVga(s.width, s.height);
  if (s.scene == "occlusion") return GenerateSyntheticScene(OcclusionSceneSpec(k), seed);
  if (s.scene == "plane") return GenerateSyntheticScene(PlaneSceneSpec(k, 1.0), seed);
  std::string names;
  for (const SyntheticSceneSpec& spec : StandardSceneSpecs(k)) {
    if (spec.name == s.scene) return GenerateSyntheticScene(spec, seed);
    names += " " + spec.name;
  }
  throw ValidationError("unknown scene '" + s.scene + "'; choose from" + names +
                        " occlusion plane");
}

SessionConfig MakeSessionConfig(const Common& c) {
  SessionConfig s;
  s.icp.seed = EffectiveSeed(c);
  s.color_quality = c.quality;
  s.empty_threshold = c.empty_threshold;
  s.icp_max_width = c.icp_max_width;
  s.postprocess = !c.no_postprocess;
  s.filter.ghost_range_delta_mm = c.ghost_delta_mm;
  s.filter.ghost_majority = c.ghost_majority;
  s.filter.crack_max_window = c.crack_max_window;
  s.transport = Transport(c);
  s.Validate();
  return s;
}

void PrintPose(const char* label, const RigidTransform& m) {
  const Eigen::Matrix4d x = m.matrix();
  std::printf("%s\n", label);
  for (int r = 0; r < 3; ++r) {
    std::printf("  % .9f % .9f % .9f % .6f\n", x(r, 0), x(r, 1), x(r, 2), x(r, 3));
  }
}

void PrintPoseError(const ScenePair& p, const RigidTransform& estimate) {
  if (!p.ground_truth) return;
  const RigidTransform e = estimate * p.ground_truth->inverse();
  std::printf("pose error: %.4f deg, %.2f mm\n", e.angle() * 180.0 / M_PI,
              e.translation().norm() * 1000.0);
}

void PrintRecord(const SessionOutput& out, const ScenePair& p, const EnergyModel& m) {
  const TransmissionRecord& r = out.record;
  const Intrinsics& k = p.intrinsics;
  std::printf("scheme: %s\n", SchemeName(r.scheme));
  if (r.scheme == Scheme::kRprr) {
    std::printf("icp: %d iterations, converged %s%s\n", r.iterations, r.converged ? "yes" : "no",
                r.fallback ? ", fell back to full frames" : "");
    std::printf("blocks: prediction %d, validation %d, payload %d of %d\n", r.prediction_blocks,
                r.validation_blocks, r.payload_blocks,
                BlockSet::ForImage(k.width, k.height).grid_size());
  }
  std::printf("bytes: icp %llu, block set %llu, container a %llu, container b %llu, total %llu\n",
              static_cast<unsigned long long>(r.icp_messages),
              static_cast<unsigned long long>(r.block_coords),
              static_cast<unsigned long long>(r.container_a),
              static_cast<unsigned long long>(r.container_b),
              static_cast<unsigned long long>(r.total()));
  std::printf("coded sections: depth %llu, color %llu\n",
              static_cast<unsigned long long>(r.depth_bytes),
              static_cast<unsigned long long>(r.color_bytes));
  std::printf("observed on the wire: %llu\n", static_cast<unsigned long long>(out.observed_bytes));
  std::printf("bpp (both views): %.4f\n", BitsPerPixel(r.total(), k.width, 2 * k.height));
  const double psnr = Psnr(p.c_b, out.color);
  if (psnr == kInfinitePsnr) {
    std::printf("psnr: inf\n");
  } else {
    std::printf("psnr: %.3f dB\n", psnr);
  }
  std::printf("timings: pose %.4f s, encode %.4f s, send %.4f s\n", r.timings.pose_s,
              r.timings.encode_s, r.timings.send_s);
  std::printf("energy: %.2f mJ\n", EnergyEstimate(r.timings, r.scheme, m) * 1000.0);
}

void WriteOutputs(const SessionOutput& out, const std::string& depth, const std::string& color) {
  if (!depth.empty()) WriteDepthImage(depth, out.depth);
  if (!color.empty()) WriteColorImage(color, out.color);
}

int RunPose(const SceneSource& src, const Common& c) {
  const std::uint64_t seed = EffectiveSeed(c);
  const ScenePair p = LoadSource(src, seed);
  const SessionConfig s = MakeSessionConfig(c);
  const int f = s.IcpFactor(p.intrinsics.width);
  const DistributedIcpRun run =
      RunIcpDistributed(Decimate(p.z_a, f), Decimate(p.z_b, f), p.intrinsics.Decimated(f), s.icp,
                        Transport(c));
  std::printf("grid: %dx%d (factor %d)\n", p.intrinsics.Decimated(f).width,
              p.intrinsics.Decimated(f).height, f);
  std::printf("iterations: %d, converged: %s\n", run.result.iterations,
              run.result.converged ? "yes" : "no");
  PrintPose("M_ab:", run.result.pose);
  PrintPoseError(p, run.result.pose);
  std::printf("bytes: a->b %llu, b->a %llu\n",
              static_cast<unsigned long long>(run.a.bytes_sent),
              static_cast<unsigned long long>(run.b.bytes_sent));
  return run.result.converged ? 0 : 2;
}

int RunEncode(const std::string& depth, const std::string& color, const std::string& intrinsics,
              const std::string& out, const Common& c) {
  const Intrinsics k = ReadIntrinsicsFile(intrinsics);
  const DepthImage z = ReadDepthImage(depth);
  const ColorImage img = ReadColorImage(color);
  if (z.width() != k.width || z.height() != k.height || img.width() != k.width ||
      img.height() != k.height) {
    throw IngestionError("image sizes do not match '" + intrinsics + "'");
  }
  ContainerParts parts;
  parts.flags = kFlagFullFrame;
  parts.intrinsics_hash = k.Hash();
  parts.blocks = BlockSet::ForImage(k.width, k.height);
  for (int by = 0; by < parts.blocks.blocks_y(); ++by) {
    for (int bx = 0; bx < parts.blocks.blocks_x(); ++bx) parts.blocks.insert({bx, by});
  }
  parts.depth = EncodeDepth(FrameTiles(z));
  parts.color = EncodeColor(img, c.quality);
  const std::vector<std::uint8_t> bytes = PackContainer(parts);
  WriteFileBytes(out, std::string(bytes.begin(), bytes.end()));
  std::printf("wrote %s: %zu bytes (depth %zu, color %zu), %.4f bpp\n", out.c_str(), bytes.size(),
              parts.depth.size(), parts.color.size(), BitsPerPixel(bytes.size(), k.width, k.height));
  return 0;
}

int RunDecode(const std::string& in, const std::string& intrinsics, const std::string& depth_out,
              const std::string& color_out) {
  const std::string raw = ReadFileBytes(in);
  const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
  const ContainerParts parts = UnpackContainer(bytes);
  if (!(parts.flags & kFlagFullFrame)) {
    throw ValidationError("'" + in +
                          "' holds a partial payload; it can only be rebuilt inside a session");
  }
  const ColorImage color = DecodeColor(parts.color);
  if (!intrinsics.empty() && ReadIntrinsicsFile(intrinsics).Hash() != parts.intrinsics_hash) {
    throw ValidationError("'" + in + "' was encoded for different intrinsics");
  }
  const DepthImage depth = FrameFromTiles(DecodeDepth(parts.depth), color.width(), color.height());
  if (!depth_out.empty()) WriteDepthImage(depth_out, depth);
  if (!color_out.empty()) WriteColorImage(color_out, color);
  std::printf("decoded %dx%d frame from %s (%zu bytes)\n", color.width(), color.height(),
              in.c_str(), bytes.size());
  return 0;
}

int RunSynth(const SceneSource& src, const Common& c, double noise_mm, const std::string& out) {
  if (!src.dataset.empty()) throw ValidationError("synth generates scenes; drop --dataset");
  const Intrinsics k = Intrinsics::ScaledVga(src.width, src.height);
  SyntheticSceneSpec spec;
  bool found = false;
  if (src.scene == "occlusion") {
    spec = OcclusionSceneSpec(k);
    found = true;
  } else if (src.scene == "plane") {
    spec = PlaneSceneSpec(k, 1.0);
    found = true;
  }
  for (const SyntheticSceneSpec& s : StandardSceneSpecs(k)) {
    if (!found && s.name == src.scene) {
      spec = s;
      found = true;
    }
  }
  if (!found) throw ValidationError("unknown scene '" + src.scene + "'");
  spec.noise_mm = noise_mm;
  const ScenePair p = GenerateSyntheticScene(spec, EffectiveSeed(c));
  SaveRawScenePair(out, p);
  std::printf("wrote %s (raw layout, %dx%d), FoV overlap %.3f\n", out.c_str(), k.width, k.height,
              FieldOfViewOverlap(spec));
  PrintPose("ground truth M_ab:", *p.ground_truth);
  return 0;
}

int RunExperimentCommand(const std::string& config, const std::string& csv,
                         const std::string& summary, bool no_timing, int jobs) {
  ExperimentConfig c = ExperimentConfig::Read(config);
  if (jobs > 0) c.jobs = jobs;
  const ExperimentReport report = RunExperiment(c);
  const std::string table = ReportCsv(report, !no_timing);
  const std::string text = ReportSummary(report);
  if (!csv.empty()) WriteFileBytes(csv, table);
  if (!summary.empty()) WriteFileBytes(summary, text);
  if (csv.empty()) std::cout << table << "\n";
  std::cout << text;
  return report.passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RPRR: redundancy-pruned transmission between two RGB-D sensors"};
  app.require_subcommand(1);
  Common common;
  SceneSource source;

  auto* pose = app.add_subcommand("pose", "Estimate the relative pose with the distributed ICP");
  AddSource(pose, source);
  AddSeed(pose, common);
  AddTransport(pose, common);
  pose->add_option("--icp-max-width", common.icp_max_width,
                   "Pose estimation grid width limit (0: full resolution)")
      ->capture_default_str();

  std::string depth_in, color_in, intrinsics, output;
  auto* encode = app.add_subcommand("encode", "Pack one depth/color frame into a container");
  encode->add_option("--depth", depth_in, "Depth image (.pgm or .png)")->required();
  encode->add_option("--color", color_in, "Color image (.ppm or .png)")->required();
  encode->add_option("--intrinsics", intrinsics, "Intrinsics file")->required();
  encode->add_option("-o,--output", output, "Container file")->required();
  encode->add_option("--color-quality", common.quality, "Color quality 0..100")
      ->check(CLI::Range(0, 100))
      ->capture_default_str();

  std::string input, depth_out, color_out;
  auto* decode = app.add_subcommand("decode", "Unpack a full-frame container");
  decode->add_option("-i,--input", input, "Container file")->required();
  decode->add_option("--intrinsics", intrinsics, "Check against this intrinsics file");
  decode->add_option("--depth-out", depth_out, "Decoded depth image");
  decode->add_option("--color-out", color_out, "Decoded color image");

  auto* session = app.add_subcommand("session", "Run the redundancy-pruned scheme end to end");
  AddSource(session, source);
  AddSeed(session, common);
  AddTransport(session, common);
  AddSessionOptions(session, common);
  bool swap_roles = false;
  session->add_flag("--swap-roles", swap_roles, "Sensor b sends the complete frames");
  session->add_option("--depth-out", depth_out, "Reconstructed depth image");
  session->add_option("--color-out", color_out, "Reconstructed color image");

  auto* independent = app.add_subcommand("independent", "Send both complete frames");
  AddSource(independent, source);
  AddSeed(independent, common);
  AddTransport(independent, common);
  independent->add_option("--color-quality", common.quality, "Color quality 0..100")
      ->check(CLI::Range(0, 100))
      ->capture_default_str();
  independent->add_option("--depth-out", depth_out, "Decoded depth image of sensor b");
  independent->add_option("--color-out", color_out, "Decoded color image of sensor b");

  double noise_mm = 0.0;
  auto* synth = app.add_subcommand("synth", "Render a synthetic scene pair to disk");
  AddSource(synth, source);
  AddSeed(synth, common);
  synth->add_option("--noise-mm", noise_mm, "Depth noise standard deviation")
      ->capture_default_str();
  synth->add_option("-o,--output", output, "Output directory")->required();

  std::string config, csv, summary;
  bool no_timing = false;
  int jobs = 0;
  auto* experiment = app.add_subcommand("experiment", "Quality sweep of both schemes");
  experiment->add_option("--config", config, "Experiment config (key = value)")->required();
  experiment->add_option("--csv", csv, "CSV table output");
  experiment->add_option("--summary", summary, "Text summary output");
  experiment->add_flag("--no-timing", no_timing, "Omit energy and timing columns");
  experiment->add_option("--jobs", jobs, "Scenes run concurrently (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const EnergyModel energy;
    if (*pose) return RunPose(source, common);
    if (*encode) return RunEncode(depth_in, color_in, intrinsics, output, common);
    if (*decode) return RunDecode(input, intrinsics, depth_out, color_out);
    if (*session) {
      const ScenePair p = LoadSource(source, EffectiveSeed(common));
      SessionConfig s = MakeSessionConfig(common);
      s.swap_roles = swap_roles;
      ScenePair view = p;
      if (swap_roles) {
        std::swap(view.c_a, view.c_b);
      }
      const SessionOutput out = RunSession(p, s);
      PrintPose("M_ab:", out.m_ab);
      if (!swap_roles) PrintPoseError(p, out.m_ab);
      PrintRecord(out, view, energy);
      WriteOutputs(out, depth_out, color_out);
      return 0;
    }
    if (*independent) {
      const ScenePair p = LoadSource(source, EffectiveSeed(common));
      const SessionOutput out = RunIndependent(p, common.quality, Transport(common));
      PrintRecord(out, p, energy);
      WriteOutputs(out, depth_out, color_out);
      return 0;
    }
    if (*synth) return RunSynth(source, common, noise_mm, output);
    if (*experiment) return RunExperimentCommand(config, csv, summary, no_timing, jobs);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rprr: error: %s\n", e.what());
    return 1;
  }
  return 1;
}

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

// Quality sweeps of both transmission schemes over a set of scene pairs,
// with a CSV table, a text summary and pass/fail checks.

#ifndef RPRR_EXPERIMENT_H_
#define RPRR_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rprr/dataset.h"
#include "rprr/metrics.h"
#include "rprr/session.h"

namespace rprr {

struct ExperimentConfig {
  // Names from the standard synthetic set, or empty for all six. Ignored
  // when `dataset` is set.
  std::vector<std::string> scenes;
  int width = 640;
  int height = 480;
  std::vector<int> qualities{100, 75, 50, 25, 0};
  std::uint64_t seed = 1;
  // A scene pair on disk instead of the synthetic set.
  std::string dataset;
  DatasetFormat dataset_format = DatasetFormat::kTum;
  LoadOptions dataset_options;
  SessionConfig session;
  EnergyModel energy;
  // Scenes run concurrently.
  int jobs = 1;

  // Checks; a negative value disables the check.
  double max_byte_ratio = 0.67;
  double min_overlap = 0.4;
  double min_lossless_psnr = 30.0;
  bool check_monotone = true;

  // Keys: scenes, width, height, qualities, seed, dataset, dataset_format,
  // dataset_first, dataset_gap, transport, empty_threshold, postprocess,
  // icp_max_width, max_rejections, jobs, max_byte_ratio, min_overlap,
  // min_lossless_psnr, check_monotone. Unknown keys are errors. Throws
  // ValidationError.
  static ExperimentConfig FromKeyValues(const std::map<std::string, std::string>& kv,
                                        const std::string& origin);
  // Reads the file and applies RPRR_SEED from the environment when set.
  static ExperimentConfig Read(const std::string& path);

  void Validate() const;
};

struct ExperimentRow {
  std::string scene;
  Scheme scheme = Scheme::kRprr;
  int quality = 0;
  std::uint64_t depth_bytes = 0;
  std::uint64_t color_bytes = 0;
  std::uint64_t total_bytes = 0;
  // Over the pixels of both views.
  double bpp = 0.0;
  // Reconstructed view of sensor b against the original.
  double psnr_db = 0.0;
  int iterations = 0;
  bool converged = false;
  bool fallback = false;
  double energy_j = 0.0;
  StageTimings timings;
  // Nonempty when the session failed.
  std::string error;
};

struct ExperimentCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  // FoV overlap per synthetic scene.
  std::map<std::string, double> overlap;
  std::vector<ExperimentCheck> checks;

  bool passed() const;
};

ExperimentReport RunExperiment(const ExperimentConfig& config);

// One row per (scene, scheme, quality). Without timing columns the table is
// byte-identical across runs with the same config.
std::string ReportCsv(const ExperimentReport& report, bool timing_columns = true);
std::string ReportSummary(const ExperimentReport& report);

}  // namespace rprr

#endif  // RPRR_EXPERIMENT_H_

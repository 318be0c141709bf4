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

#include "rprr/experiment.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "rprr/dataset.h"
#include "rprr/errors.h"
#include "rprr/synthetic.h"

namespace rprr {
namespace {

ExperimentConfig SmallSweep() {
  ExperimentConfig c;
  c.width = 160;
  c.height = 120;
  c.jobs = 3;
  return c;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(RunExperimentTest, SixScenesFiveQualitiesTwoSchemes) {
  const ExperimentReport r = RunExperiment(SmallSweep());
  ASSERT_EQ(r.rows.size(), 60u);
  std::set<std::string> scenes;
  for (const ExperimentRow& row : r.rows) {
    scenes.insert(row.scene);
    EXPECT_TRUE(row.error.empty()) << row.error;
    EXPECT_EQ(row.total_bytes > 0, true);
    EXPECT_NEAR(row.bpp, 8.0 * row.total_bytes / (160.0 * 240.0), 1e-12);
    if (row.scheme == Scheme::kIndependent) EXPECT_EQ(row.iterations, 0);
  }
  EXPECT_EQ(scenes.size(), 6u);
  EXPECT_EQ(r.overlap.size(), 6u);
  const auto lines = Lines(ReportCsv(r, true));
  ASSERT_EQ(lines.size(), 61u);
  EXPECT_EQ(lines[0],
            "scene,scheme,quality,depth_bytes,color_bytes,total_bytes,bpp,psnr_db,iterations,"
            "converged,fallback,energy_mj,pose_s,encode_s,send_s,error");
  EXPECT_EQ(Lines(ReportCsv(r, false))[0],
            "scene,scheme,quality,depth_bytes,color_bytes,total_bytes,bpp,psnr_db,iterations,"
            "converged,fallback,error");
}

TEST(RunExperimentTest, CsvIsReproducibleWithoutTimings) {
  ExperimentConfig c = SmallSweep();
  c.scenes = {"room-tilt", "room-lateral"};
  c.qualities = {100, 25};
  const std::string first = ReportCsv(RunExperiment(c), false);
  c.jobs = 1;
  EXPECT_EQ(ReportCsv(RunExperiment(c), false), first);
}

TEST(RunExperimentTest, SummaryListsChecks) {
  ExperimentConfig c = SmallSweep();
  c.scenes = {"room-forward"};
  c.qualities = {100, 0};
  const ExperimentReport r = RunExperiment(c);
  const std::string s = ReportSummary(r);
  for (const ExperimentCheck& check : r.checks) {
    EXPECT_NE(s.find(check.name), std::string::npos) << check.name;
  }
  EXPECT_NE(s.find("room-forward"), std::string::npos);
}

TEST(RunExperimentTest, FailedThresholdFailsTheReport) {
  ExperimentConfig c = SmallSweep();
  c.scenes = {"room-yaw-left"};
  c.qualities = {50};
  c.max_byte_ratio = 0.01;
  const ExperimentReport r = RunExperiment(c);
  EXPECT_FALSE(r.passed());
  c.max_byte_ratio = -1;
  EXPECT_TRUE(RunExperiment(c).passed());
}

TEST(RunExperimentTest, UnknownSceneIsRejected) {
  ExperimentConfig c = SmallSweep();
  c.scenes = {"kitchen"};
  EXPECT_THROW(RunExperiment(c), ValidationError);
}

TEST(RunExperimentTest, RawDatasetScene) {
  const auto dir = std::filesystem::temp_directory_path() / "rprr_experiment_raw";
  std::filesystem::remove_all(dir);
  const Intrinsics k = Intrinsics::ScaledVga(160, 120);
  SaveRawScenePair(dir.string(), GenerateSyntheticScene(StandardSceneSpecs(k)[0], 1));
  ExperimentConfig c = SmallSweep();
  c.dataset = dir.string();
  c.dataset_format = DatasetFormat::kRaw;
  c.qualities = {100, 50};
  const ExperimentReport r = RunExperiment(c);
  ASSERT_EQ(r.rows.size(), 4u);
  for (const ExperimentRow& row : r.rows) EXPECT_TRUE(row.error.empty()) << row.error;
  std::filesystem::remove_all(dir);
}

TEST(ExperimentConfigTest, ParsesKeys) {
  const ExperimentConfig c = ExperimentConfig::FromKeyValues(
      {{"scenes", "room-tilt, room-wide"},
       {"qualities", "90,10"},
       {"seed", "7"},
       {"transport", "socket"},
       {"postprocess", "false"},
       {"max_byte_ratio", "0.8"},
       {"jobs", "2"}},
      "test.conf");
  EXPECT_EQ(c.scenes, (std::vector<std::string>{"room-tilt", "room-wide"}));
  EXPECT_EQ(c.qualities, (std::vector<int>{90, 10}));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.session.icp.seed, 7u);
  EXPECT_EQ(c.session.transport, TransportKind::kSocket);
  EXPECT_FALSE(c.session.postprocess);
  EXPECT_DOUBLE_EQ(c.max_byte_ratio, 0.8);
  EXPECT_EQ(c.jobs, 2);
}

TEST(ExperimentConfigTest, ErrorsNameTheFileAndKey) {
  try {
    ExperimentConfig::FromKeyValues({{"qualitys", "1"}}, "sweep.conf");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("sweep.conf"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("qualitys"), std::string::npos);
  }
  EXPECT_THROW(ExperimentConfig::FromKeyValues({{"qualities", "101"}}, "x"), ValidationError);
  EXPECT_THROW(ExperimentConfig::FromKeyValues({{"width", "wide"}}, "x"), ValidationError);
  EXPECT_THROW(ExperimentConfig::FromKeyValues({{"transport", "udp"}}, "x"), ValidationError);
  EXPECT_THROW(ExperimentConfig::FromKeyValues({{"jobs", "0"}}, "x"), ValidationError);
}

TEST(ExperimentConfigTest, ReadsFileAndSeedOverride) {
  const auto path = std::filesystem::temp_directory_path() / "rprr_experiment.conf";
  {
    std::ofstream out(path);
    out << "# sweep\nwidth = 320\nheight = 240\nseed = 3\n";
  }
  ExperimentConfig c = ExperimentConfig::Read(path.string());
  EXPECT_EQ(c.width, 320);
  EXPECT_EQ(c.seed, 3u);
  setenv("RPRR_SEED", "11", 1);
  c = ExperimentConfig::Read(path.string());
  unsetenv("RPRR_SEED");
  EXPECT_EQ(c.seed, 11u);
  EXPECT_THROW(ExperimentConfig::Read("/nonexistent/sweep.conf"), Error);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace rprr

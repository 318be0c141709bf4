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

#include <algorithm>
#include <cstdlib>
#include <future>
#include <sstream>

#include "rprr/color_codec.h"
#include "rprr/errors.h"
#include "rprr/image_io.h"
#include "rprr/synthetic.h"

namespace rprr {
namespace {

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long ParseInteger(const std::string& key, const std::string& v, const std::string& origin) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    throw ValidationError(origin + ": '" + key + "' expects an integer, got '" + v + "'");
  }
  return n;
}

double ParseReal(const std::string& key, const std::string& v, const std::string& origin) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    throw ValidationError(origin + ": '" + key + "' expects a number, got '" + v + "'");
  }
  return x;
}

bool ParseBool(const std::string& key, const std::string& v, const std::string& origin) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(origin + ": '" + key + "' expects true or false, got '" + v + "'");
}

struct SceneJob {
  std::string name;
  ScenePair pair;
  std::optional<double> overlap;
};

ExperimentRow MakeRow(const std::string& scene, Scheme scheme, int quality) {
  ExperimentRow r;
  r.scene = scene;
  r.scheme = scheme;
  r.quality = quality;
  return r;
}

void FillRow(ExperimentRow& r, const SessionOutput& out, const ScenePair& pair,
             const EnergyModel& m) {
  const TransmissionRecord& rec = out.record;
  const Intrinsics& k = pair.intrinsics;
  r.depth_bytes = rec.depth_bytes;
  r.color_bytes = rec.color_bytes;
  r.total_bytes = rec.total();
  r.bpp = BitsPerPixel(rec.total(), k.width, 2 * k.height);
  r.psnr_db = Psnr(pair.c_b, out.color);
  r.iterations = rec.iterations;
  r.converged = rec.converged;
  r.fallback = rec.fallback;
  r.timings = rec.timings;
  r.energy_j = EnergyEstimate(rec.timings, rec.scheme, m);
}

std::vector<ExperimentRow> RunScene(const SceneJob& job, const ExperimentConfig& c) {
  std::vector<ExperimentRow> rows;
  for (int q : c.qualities) {
    ExperimentRow rprr = MakeRow(job.name, Scheme::kRprr, q);
    ExperimentRow ind = MakeRow(job.name, Scheme::kIndependent, q);
    try {
      SessionConfig s = c.session;
      s.color_quality = q;
      FillRow(rprr, RunSession(job.pair, s), job.pair, c.energy);
    } catch (const std::exception& e) {
      rprr.error = e.what();
    }
    try {
      FillRow(ind, RunIndependent(job.pair, q, c.session.transport), job.pair, c.energy);
    } catch (const std::exception& e) {
      ind.error = e.what();
    }
    rows.push_back(std::move(rprr));
    rows.push_back(std::move(ind));
  }
  return rows;
}

std::string Fixed(double v, int digits) {
  if (v == kInfinitePsnr) return "inf";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

const ExperimentRow* FindRow(const std::vector<ExperimentRow>& rows, const std::string& scene,
                             Scheme scheme, int quality) {
  for (const ExperimentRow& r : rows) {
    if (r.scene == scene && r.scheme == scheme && r.quality == quality) return &r;
  }
  return nullptr;
}

void AddChecks(ExperimentReport& report, const ExperimentConfig& c) {
  std::vector<std::string> scenes;
  for (const ExperimentRow& r : report.rows) {
    if (std::find(scenes.begin(), scenes.end(), r.scene) == scenes.end()) scenes.push_back(r.scene);
  }

  ExperimentCheck errors{"sessions", true, ""};
  int failed = 0;
  for (const ExperimentRow& r : report.rows) {
    if (r.error.empty()) continue;
    if (failed++ == 0) {
      errors.detail = r.scene + " " + SchemeName(r.scheme) + " q" + std::to_string(r.quality) +
                      ": " + r.error;
    }
  }
  errors.passed = failed == 0;
  if (failed > 1) errors.detail += " (+" + std::to_string(failed - 1) + " more)";
  report.checks.push_back(errors);

  if (c.max_byte_ratio >= 0) {
    ExperimentCheck check{"byte ratio <= " + Fixed(c.max_byte_ratio, 2), true, ""};
    double worst = 0;
    std::string worst_at;
    int considered = 0;
    for (const std::string& scene : scenes) {
      const auto ov = report.overlap.find(scene);
      if (c.min_overlap >= 0 && ov != report.overlap.end() && ov->second < c.min_overlap) continue;
      for (int q : c.qualities) {
        const ExperimentRow* a = FindRow(report.rows, scene, Scheme::kRprr, q);
        const ExperimentRow* b = FindRow(report.rows, scene, Scheme::kIndependent, q);
        if (!a || !b || !a->error.empty() || !b->error.empty() || b->total_bytes == 0) continue;
        ++considered;
        const double ratio = static_cast<double>(a->total_bytes) / b->total_bytes;
        if (ratio > c.max_byte_ratio) {
          check.passed = false;
          if (!check.detail.empty()) check.detail += "; ";
          check.detail += scene + " q" + std::to_string(q) + " " + Fixed(ratio, 3);
        }
        if (ratio > worst) {
          worst = ratio;
          worst_at = scene + " q" + std::to_string(q);
        }
      }
    }
    if (check.passed) {
      check.detail = std::to_string(considered) + " pairs, worst " + Fixed(worst, 3) +
                     (worst_at.empty() ? "" : " (" + worst_at + ")");
    } else {
      check.detail = "exceeded at " + check.detail;
    }
    report.checks.push_back(check);
  }

  if (c.check_monotone) {
    ExperimentCheck check{"PSNR non-increasing as bpp decreases", true, ""};
    for (const std::string& scene : scenes) {
      for (Scheme scheme : {Scheme::kRprr, Scheme::kIndependent}) {
        std::vector<const ExperimentRow*> rows;
        for (const ExperimentRow& r : report.rows) {
          if (r.scene == scene && r.scheme == scheme && r.error.empty()) rows.push_back(&r);
        }
        std::sort(rows.begin(), rows.end(), [](const ExperimentRow* a, const ExperimentRow* b) {
          return a->bpp > b->bpp;
        });
        for (std::size_t n = 1; n < rows.size(); ++n) {
          if (rows[n]->psnr_db > rows[n - 1]->psnr_db) {
            check.passed = false;
            if (!check.detail.empty()) check.detail += "; ";
            check.detail += scene + " " + SchemeName(scheme) + " q" +
                            std::to_string(rows[n]->quality) + " " + Fixed(rows[n]->psnr_db, 2) +
                            " dB > q" + std::to_string(rows[n - 1]->quality) + " " +
                            Fixed(rows[n - 1]->psnr_db, 2) + " dB";
          }
        }
      }
    }
    report.checks.push_back(check);
  }

  const bool has_lossless = std::find(c.qualities.begin(), c.qualities.end(), 100) != c.qualities.end();
  if (c.min_lossless_psnr >= 0 && has_lossless) {
    ExperimentCheck check{"rprr PSNR at quality 100 >= " + Fixed(c.min_lossless_psnr, 1) + " dB",
                          true, ""};
    double lowest = kInfinitePsnr;
    for (const std::string& scene : scenes) {
      const ExperimentRow* r = FindRow(report.rows, scene, Scheme::kRprr, 100);
      if (!r || !r->error.empty()) continue;
      lowest = std::min(lowest, r->psnr_db);
      if (r->psnr_db < c.min_lossless_psnr) {
        check.passed = false;
        if (!check.detail.empty()) check.detail += "; ";
        check.detail += scene + " " + Fixed(r->psnr_db, 2) + " dB";
      }
    }
    if (check.passed) check.detail = "lowest " + Fixed(lowest, 2) + " dB";
    report.checks.push_back(check);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::FromKeyValues(const std::map<std::string, std::string>& kv,
                                                 const std::string& origin) {
  ExperimentConfig c;
  for (const auto& [key, v] : kv) {
    if (key == "scenes") {
      c.scenes = v == "all" ? std::vector<std::string>{} : SplitList(v);
    } else if (key == "width") {
      c.width = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "height") {
      c.height = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "qualities") {
      c.qualities.clear();
      for (const std::string& q : SplitList(v)) {
        c.qualities.push_back(static_cast<int>(ParseInteger(key, q, origin)));
      }
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(ParseInteger(key, v, origin));
    } else if (key == "dataset") {
      c.dataset = v;
    } else if (key == "dataset_format") {
      c.dataset_format = ParseDatasetFormat(v);
    } else if (key == "dataset_first") {
      c.dataset_options.first = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "dataset_gap") {
      c.dataset_options.gap = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "transport") {
      if (v == "inprocess") {
        c.session.transport = TransportKind::kInProcess;
      } else if (v == "socket") {
        c.session.transport = TransportKind::kSocket;
      } else {
        throw ValidationError(origin + ": transport must be inprocess or socket");
      }
    } else if (key == "empty_threshold") {
      c.session.empty_threshold = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "postprocess") {
      c.session.postprocess = ParseBool(key, v, origin);
    } else if (key == "icp_max_width") {
      c.session.icp_max_width = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "max_rejections") {
      c.session.icp.max_rejections = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "jobs") {
      c.jobs = static_cast<int>(ParseInteger(key, v, origin));
    } else if (key == "max_byte_ratio") {
      c.max_byte_ratio = ParseReal(key, v, origin);
    } else if (key == "min_overlap") {
      c.min_overlap = ParseReal(key, v, origin);
    } else if (key == "min_lossless_psnr") {
      c.min_lossless_psnr = ParseReal(key, v, origin);
    } else if (key == "check_monotone") {
      c.check_monotone = ParseBool(key, v, origin);
    } else {
      throw ValidationError(origin + ": unknown key '" + key + "'");
    }
  }
  c.session.icp.seed = c.seed;
  c.Validate();
  return c;
}

ExperimentConfig ExperimentConfig::Read(const std::string& path) {
  auto kv = ReadKeyValueFile(path);
  if (const char* env = std::getenv("RPRR_SEED")) kv["seed"] = env;
  return FromKeyValues(kv, path);
}

void ExperimentConfig::Validate() const {
  session.Validate();
  energy.Validate();
  if (width < 8 || height < 8 || width > 4096 || height > 4096) {
    throw ValidationError("experiment image size must be within 8..4096");
  }
  if (qualities.empty()) throw ValidationError("experiment needs at least one quality");
  for (int q : qualities) {
    if (q < 0 || q > kMaxColorQuality) throw ValidationError("qualities must be within 0..100");
  }
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ExperimentCheck& c) { return c.passed; });
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  ExperimentReport report;
  std::vector<SceneJob> jobs;
  if (!config.dataset.empty()) {
    SceneJob job;
    job.name = config.dataset;
    job.pair = LoadScenePair(config.dataset, config.dataset_format, config.dataset_options);
    jobs.push_back(std::move(job));
  } else {
    const auto specs = StandardSceneSpecs(Intrinsics::ScaledVga(config.width, config.height));
    for (const std::string& name : config.scenes) {
      const bool known = std::any_of(specs.begin(), specs.end(),
                                     [&](const SyntheticSceneSpec& s) { return s.name == name; });
      if (!known) throw ValidationError("unknown scene '" + name + "'");
    }
    for (const SyntheticSceneSpec& spec : specs) {
      if (!config.scenes.empty() &&
          std::find(config.scenes.begin(), config.scenes.end(), spec.name) == config.scenes.end()) {
        continue;
      }
      jobs.push_back({spec.name, GenerateSyntheticScene(spec, config.seed), FieldOfViewOverlap(spec)});
    }
  }
  for (const SceneJob& job : jobs) {
    if (job.overlap) report.overlap[job.name] = *job.overlap;
  }

  std::vector<std::vector<ExperimentRow>> per_scene(jobs.size());
  for (std::size_t start = 0; start < jobs.size(); start += config.jobs) {
    std::vector<std::future<std::vector<ExperimentRow>>> running;
    const std::size_t end = std::min(jobs.size(), start + config.jobs);
    for (std::size_t n = start; n < end; ++n) {
      running.push_back(std::async(std::launch::async, RunScene, std::cref(jobs[n]), std::cref(config)));
    }
    for (std::size_t n = start; n < end; ++n) per_scene[n] = running[n - start].get();
  }
  for (auto& rows : per_scene) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  AddChecks(report, config);
  return report;
}

std::string ReportCsv(const ExperimentReport& report, bool timing_columns) {
  std::ostringstream out;
  out << "scene,scheme,quality,depth_bytes,color_bytes,total_bytes,bpp,psnr_db,iterations,"
         "converged,fallback";
  if (timing_columns) out << ",energy_mj,pose_s,encode_s,send_s";
  out << ",error\n";
  for (const ExperimentRow& r : report.rows) {
    out << CsvField(r.scene) << ',' << SchemeName(r.scheme) << ',' << r.quality << ','
        << r.depth_bytes << ',' << r.color_bytes << ',' << r.total_bytes << ','
        << Fixed(r.bpp, 4) << ',' << Fixed(r.psnr_db, 3) << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << (r.fallback ? 1 : 0);
    if (timing_columns) {
      out << ',' << Fixed(r.energy_j * 1000.0, 3) << ',' << Fixed(r.timings.pose_s, 6) << ','
          << Fixed(r.timings.encode_s, 6) << ',' << Fixed(r.timings.send_s, 6);
    }
    out << ',' << CsvField(r.error) << '\n';
  }
  return out.str();
}

std::string ReportSummary(const ExperimentReport& report) {
  std::ostringstream out;
  out << "Synthetic scenes are analogues built for this harness, not captured data.\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %4s %8s %10s %10s %7s %8s %8s %4s %9s\n", "scene", "q",
                "overlap", "rprr B", "indep B", "ratio", "rprr dB", "indep dB", "it", "rprr mJ");
  out << line;
  std::vector<std::pair<std::string, int>> cells;
  for (const ExperimentRow& r : report.rows) {
    if (r.scheme == Scheme::kRprr) cells.emplace_back(r.scene, r.quality);
  }
  for (const auto& [scene, q] : cells) {
    const ExperimentRow* a = FindRow(report.rows, scene, Scheme::kRprr, q);
    const ExperimentRow* b = FindRow(report.rows, scene, Scheme::kIndependent, q);
    const auto ov = report.overlap.find(scene);
    const std::string overlap = ov == report.overlap.end() ? "-" : Fixed(ov->second, 3);
    if (!a->error.empty() || !b || !b->error.empty()) {
      std::snprintf(line, sizeof line, "%-16s %4d %8s  failed: %s\n", scene.c_str(), q,
                    overlap.c_str(), (!a->error.empty() ? a->error : b ? b->error : "").c_str());
      out << line;
      continue;
    }
    std::snprintf(line, sizeof line, "%-16s %4d %8s %10llu %10llu %7.3f %8s %8s %4d %9.1f%s\n",
                  scene.c_str(), q, overlap.c_str(),
                  static_cast<unsigned long long>(a->total_bytes),
                  static_cast<unsigned long long>(b->total_bytes),
                  static_cast<double>(a->total_bytes) / b->total_bytes,
                  Fixed(a->psnr_db, 2).c_str(), Fixed(b->psnr_db, 2).c_str(), a->iterations,
                  a->energy_j * 1000.0, a->fallback ? "  (fallback)" : "");
    out << line;
  }
  out << "\n";
  for (const ExperimentCheck& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
  }
  return out.str();
}

}  // namespace rprr

// Copyright 2026 The transeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRANSEVAL_TOOLS_COMMANDS_HPP_
#define TRANSEVAL_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transeval/analysis.hpp"
#include "transeval/cst.hpp"
#include "transeval/embed.hpp"
#include "transeval/features.hpp"

namespace transeval::cli {

struct ReportFormats {
  bool csv = false;
  bool json = false;
  bool svg = false;

  // Comma-separated subset of csv, json, svg.
  static ReportFormats Parse(std::string_view list);
  bool any() const { return csv || json || svg; }
};

struct RunConfig {
  std::filesystem::path manifest_path;  // optional for report/pairplot
  EmbedderSpec embedder;
  std::optional<EmbedderSpec> fid_embedder;
  cst::CstParams cst;
  std::filesystem::path output_dir;
  ReportFormats report_formats{true, true, true};
  std::size_t k_pca = 3;
  bool force = false;

  void Validate() const;
};

// Cache layout under <out>/features (and <out>/features/fid for FID).
std::filesystem::path FeatureDir(const std::filesystem::path& out, bool fid = false);
std::filesystem::path RealCachePath(const std::filesystem::path& dir);
std::filesystem::path EpochCachePath(const std::filesystem::path& dir, std::int64_t epoch);
std::filesystem::path EmbedderStampPath(const std::filesystem::path& dir);

struct CacheEntry {
  std::string name;  // "real" or "epoch N"
  std::filesystem::path path;
  std::size_t rows = 0;
  bool cache_hit = false;
};

// Embeds the real set and every epoch. Caches are reused unless --force is
// given or the embedder description changed.
std::vector<CacheEntry> CmdEmbed(const RunConfig& config, std::ostream& log);

struct LoadedCaches {
  FeatureMatrix real;
  std::vector<std::int64_t> epochs;
  std::vector<FeatureMatrix> epoch_features;
  std::string embedder;  // stamp recorded next to the caches
};

// Epoch caches found in a feature directory, ascending.
LoadedCaches LoadCaches(const std::filesystem::path& dir);

MetricSeries CmdReport(const RunConfig& config, std::ostream& log);

PairplotExport CmdPairplot(const RunConfig& config, std::span<const std::int64_t> epochs,
                           std::ostream& log);

L1Scale CmdBandL1(const std::filesystem::path& original,
                  const std::filesystem::path& transformed, BandMode mode,
                  const std::filesystem::path& out_png, std::ostream& log);

struct FixtureOptions {
  std::string kind;  // convergence, dataset, shift, grid
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t dim = 8;
  std::size_t n = 200;
  std::size_t n_epochs = 10;
  std::size_t images = 5;
  int size = 32;
  int period = 8;
  double amplitude = 0.25;
  double shift = 0.25;
  BandMode band = BandMode::kRed;
};

void CmdFixtures(const FixtureOptions& options, std::ostream& log);

// Static line plots, one panel per metric.
std::string RenderSvg(const MetricSeries& series);

// Writes via a temporary file and rename.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

// Full command line. Returns the process exit code: 0 success,
// 1 computation failure, 2 configuration or input error.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace transeval::cli

#endif  // TRANSEVAL_TOOLS_COMMANDS_HPP_

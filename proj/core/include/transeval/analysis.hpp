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

#ifndef TRANSEVAL_ANALYSIS_HPP_
#define TRANSEVAL_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "transeval/cst.hpp"
#include "transeval/features.hpp"
#include "transeval/image.hpp"

namespace transeval {

// ---- PCA ----

struct PcaModel {
  Eigen::VectorXd mean;                // D
  Eigen::MatrixXd components;          // k x D, orthonormal rows
  Eigen::VectorXd explained_variance;  // k, descending
  double total_variance = 0.0;         // sum of per-coordinate variances

  std::size_t k() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

// Requires N >= 2 and 1 <= k <= min(N - 1, D). Each component is signed so
// that its largest-magnitude entry is positive.
PcaModel PcaFit(const Eigen::MatrixXd& samples, std::size_t k);
PcaModel PcaFit(const FeatureMatrix& features, std::size_t k);

// (F - mean) * components^T, N x k.
Eigen::MatrixXd PcaProject(const PcaModel& model, const Eigen::MatrixXd& samples);
Eigen::MatrixXd PcaProject(const PcaModel& model, const FeatureMatrix& features);

// ---- kernel density ----

inline constexpr std::size_t kDefaultGridPoints = 256;

struct DensityCurve {
  std::vector<double> grid;     // ascending
  std::vector<double> density;  // >= 0
  double bandwidth = 0.0;

  // Trapezoidal integral of density over grid.
  double Integral() const;
};

// Gaussian kernel, Scott bandwidth sd * n^(-1/5) with the sample standard
// deviation, grid over [min - 4h, max + 4h].
DensityCurve Kde1d(std::span<const double> values,
                   std::size_t grid_points = kDefaultGridPoints);

// Gaussian kernel density at x.
double KdeAt(std::span<const double> values, double bandwidth, double x);

// First Wasserstein distance between two empirical distributions.
double Wasserstein1d(std::span<const double> a, std::span<const double> b);

// ---- pair plot ----

struct PairplotGroup {
  std::string label;
  const FeatureMatrix* features = nullptr;
};

struct PairplotExport {
  PcaModel model;
  std::vector<std::string> group_labels;
  std::vector<std::size_t> row_group;  // group index of each score row
  Eigen::MatrixXd scores;              // N_total x k
  // curves[g][c]: density of component c within group g.
  std::vector<std::vector<DensityCurve>> curves;

  std::size_t k() const { return model.k(); }
  // Scores of one group, in input order.
  std::vector<double> GroupScores(std::size_t group, std::size_t component) const;
};

// One PCA basis fitted on all groups together.
PairplotExport ExportPairplot(std::span<const PairplotGroup> groups, std::size_t k = 3,
                              std::size_t grid_points = kDefaultGridPoints);

// "group,pc1,...,pck" followed by one line per sample.
std::string PairplotCsv(const PairplotExport& data);
std::string PairplotDensityJson(const PairplotExport& data);

// ---- band L1 maps ----

enum class BandMode { kRed, kGreen, kBlue, kAll };

std::string_view BandModeName(BandMode mode);
// Accepts red, green, blue, all. Throws InputError otherwise.
BandMode ParseBandMode(std::string_view name);

struct L1Map {
  int height = 0;
  int width = 0;
  BandMode band_mode = BandMode::kAll;
  std::vector<double> values;  // row-major

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double min() const;
  double max() const;
};

// |a - b| per pixel for one band; kAll sums the three band differences.
L1Map BandL1Map(const ImageTile& a, const ImageTile& b, BandMode mode);

struct L1Scale {
  double min = 0.0;
  double max = 0.0;
  bool flat() const { return !(max > min); }
};

// Writes a 16-bit grayscale PNG, q = round((v - min) / (max - min) * 65535),
// all zeros for a flat map, and a JSON sidecar holding the scale.
L1Scale SaveL1Map(const L1Map& map, const std::filesystem::path& png_path,
                  const std::filesystem::path& sidecar_path);

// Inverse of SaveL1Map (up to 16-bit quantization).
L1Map LoadL1Map(const std::filesystem::path& png_path,
                const std::filesystem::path& sidecar_path);

// ---- trend statistics ----

// Spearman rank correlation with average ranks for ties. Requires equal
// lengths >= 3 and nonzero rank variance on both sides.
double Spearman(std::span<const double> xs, std::span<const double> ys);

// Ranks starting at 1, ties averaged.
std::vector<double> AverageRanks(std::span<const double> values);

// ---- epoch series ----

struct EpochFeatures {
  std::int64_t epoch = 0;
  const FeatureMatrix* features = nullptr;
};

// Optional second feature space (Inception-style) for FID.
struct FidInputs {
  const FeatureMatrix* real = nullptr;
  std::vector<const FeatureMatrix*> epochs;  // parallel to the epoch list
};

struct EpochRecord {
  std::int64_t epoch = 0;
  std::optional<double> fid;
  double frd = 0.0;
  double crd_distance = 0.0;
  double rf_mean_logloss = 0.0;
  double rf_std_logloss = 0.0;
  std::size_t n_generated = 0;
  std::size_t n_real = 0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// Spearman correlation of each metric against epoch. A field is empty
// when the metric is missing or constant across epochs.
struct SeriesTrend {
  std::optional<double> fid;
  std::optional<double> frd;
  std::optional<double> crd_distance;
  std::optional<double> rf_mean_logloss;

  friend bool operator==(const SeriesTrend&, const SeriesTrend&) = default;
};

inline constexpr std::size_t kMinTrendPoints = 3;

struct MetricSeries {
  std::vector<EpochRecord> records;
  std::optional<SeriesTrend> trend;  // present with >= kMinTrendPoints records
  cst::CstParams cst_params;

  friend bool operator==(const MetricSeries&, const MetricSeries&) = default;
};

// Every epoch is tested against `real` with the same CST parameters.
MetricSeries EpochSeries(const FeatureMatrix& real, std::span<const EpochFeatures> epochs,
                         const cst::CstParams& params, const FidInputs* fid = nullptr);

// Fixed 9-significant-digit formatting; empty field for a missing FID.
std::string SeriesCsv(const MetricSeries& series);
// `metadata` entries are emitted verbatim as string fields.
std::string SeriesJson(const MetricSeries& series,
                       std::span<const std::pair<std::string, std::string>> metadata = {});

// printf("%.9g") in the C locale.
std::string FormatNumber(double value);

}  // namespace transeval

#endif  // TRANSEVAL_ANALYSIS_HPP_

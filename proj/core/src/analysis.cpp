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

#include "transeval/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "transeval/error.hpp"
#include "transeval/metrics.hpp"
#include "transeval/parallel.hpp"

namespace transeval {
namespace {

using OrderedJson = nlohmann::ordered_json;

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<double> TryTrend(std::span<const double> xs, std::span<const double> ys) {
  try {
    return Spearman(xs, ys);
  } catch (const ComputationError&) {
    return std::nullopt;
  }
}

OrderedJson OptionalJson(const std::optional<double>& v) {
  return v ? OrderedJson(*v) : OrderedJson();
}

}  // namespace

// ---- PCA ----

PcaModel PcaFit(const Eigen::MatrixXd& samples, std::size_t k) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const auto d = static_cast<std::size_t>(samples.cols());
  if (n < 2) throw InputError("PCA needs at least 2 samples, got " + std::to_string(n));
  if (k < 1 || k > std::min(n - 1, d)) {
    throw InputError("PCA component count " + std::to_string(k) + " out of range [1, " +
                     std::to_string(std::min(n - 1, d)) + "]");
  }
  if (!samples.allFinite()) throw InputError("PCA input contains non-finite values");

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);
  model.total_variance = centered.squaredNorm() / denom;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::MatrixXd& v = svd.matrixV();
  model.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  model.explained_variance.resize(static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c) {
    Eigen::VectorXd dir = v.col(c);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0.0) dir = -dir;
    model.components.row(c) = dir.transpose();
    const double s = c < svd.singularValues().size() ? svd.singularValues()(c) : 0.0;
    model.explained_variance(c) = s * s / denom;
  }
  return model;
}

PcaModel PcaFit(const FeatureMatrix& features, std::size_t k) {
  return PcaFit(features.ToEigen(), k);
}

Eigen::MatrixXd PcaProject(const PcaModel& model, const Eigen::MatrixXd& samples) {
  if (static_cast<std::size_t>(samples.cols()) != model.dim()) {
    throw InputError("PCA projection dimension mismatch: model has " +
                     std::to_string(model.dim()) + ", input has " +
                     std::to_string(samples.cols()));
  }
  return (samples.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd PcaProject(const PcaModel& model, const FeatureMatrix& features) {
  return PcaProject(model, features.ToEigen());
}

// ---- kernel density ----

double DensityCurve::Integral() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    sum += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return sum;
}

double KdeAt(std::span<const double> values, double bandwidth, double x) {
  double sum = 0.0;
  for (double v : values) {
    const double z = (x - v) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return sum / (static_cast<double>(values.size()) * bandwidth *
                std::sqrt(2.0 * std::numbers::pi));
}

DensityCurve Kde1d(std::span<const double> values, std::size_t grid_points) {
  const std::size_t n = values.size();
  if (n < 2) throw InputError("kernel density needs at least 2 values");
  if (grid_points < 2) throw InputError("kernel density grid needs at least 2 points");
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("kernel density input contains non-finite values");
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw InputError("kernel density: all values identical (bandwidth 0)");

  DensityCurve curve;
  curve.bandwidth = sd * std::pow(static_cast<double>(n), -0.2);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 4.0 * curve.bandwidth;
  const double hi = *hi_it + 4.0 * curve.bandwidth;
  curve.grid.resize(grid_points);
  curve.density.resize(grid_points);
  const double span = hi - lo;
  for (std::size_t i = 0; i < grid_points; ++i) {
    curve.grid[i] = lo + span * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  curve.grid.back() = hi;
  ParallelFor(grid_points, [&](std::size_t i) {
    curve.density[i] = KdeAt(values, curve.bandwidth, curve.grid[i]);
  });
  return curve;
}

double Wasserstein1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("Wasserstein distance of an empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> all;
  all.reserve(sa.size() + sb.size());
  std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(all));
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double width = all[i + 1] - all[i];
    if (width == 0.0) continue;
    const double fa = static_cast<double>(std::upper_bound(sa.begin(), sa.end(), all[i]) - sa.begin()) /
                      static_cast<double>(sa.size());
    const double fb = static_cast<double>(std::upper_bound(sb.begin(), sb.end(), all[i]) - sb.begin()) /
                      static_cast<double>(sb.size());
    total += std::abs(fa - fb) * width;
  }
  return total;
}

// ---- pair plot ----

std::vector<double> PairplotExport::GroupScores(std::size_t group, std::size_t component) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < row_group.size(); ++r) {
    if (row_group[r] == group) {
      out.push_back(scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(component)));
    }
  }
  return out;
}

PairplotExport ExportPairplot(std::span<const PairplotGroup> groups, std::size_t k,
                              std::size_t grid_points) {
  if (groups.size() < 2) throw InputError("pair plot needs at least 2 groups");
  std::vector<const FeatureMatrix*> parts;
  for (const auto& g : groups) {
    if (g.features == nullptr || g.features->empty()) {
      throw InputError("pair plot group '" + g.label + "' is empty");
    }
    parts.push_back(g.features);
  }
  const FeatureMatrix pooled = FeatureMatrix::Concat(parts);

  PairplotExport out;
  out.model = PcaFit(pooled, k);
  out.scores = PcaProject(out.model, pooled);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out.group_labels.push_back(groups[g].label);
    out.row_group.insert(out.row_group.end(), groups[g].features->rows(), g);
  }
  out.curves.resize(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t c = 0; c < k; ++c) {
      const auto values = out.GroupScores(g, c);
      try {
        out.curves[g].push_back(Kde1d(values, grid_points));
      } catch (const InputError& e) {
        throw InputError("pair plot group '" + groups[g].label + "' component " +
                         std::to_string(c + 1) + ": " + e.what());
      }
    }
  }
  return out;
}

std::string PairplotCsv(const PairplotExport& data) {
  std::string out = "group";
  for (std::size_t c = 0; c < data.k(); ++c) out += ",pc" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t r = 0; r < data.row_group.size(); ++r) {
    out += CsvField(data.group_labels[data.row_group[r]]);
    for (std::size_t c = 0; c < data.k(); ++c) {
      out += ',';
      out += FormatNumber(data.scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    out += '\n';
  }
  return out;
}

std::string PairplotDensityJson(const PairplotExport& data) {
  OrderedJson j;
  j["k"] = data.k();
  j["explained_variance"] = std::vector<double>(data.model.explained_variance.begin(),
                                                data.model.explained_variance.end());
  j["total_variance"] = data.model.total_variance;
  OrderedJson groups = OrderedJson::array();
  for (std::size_t g = 0; g < data.group_labels.size(); ++g) {
    OrderedJson curves = OrderedJson::array();
    for (std::size_t c = 0; c < data.curves[g].size(); ++c) {
      const DensityCurve& curve = data.curves[g][c];
      OrderedJson entry;
      entry["component"] = c + 1;
      entry["bandwidth"] = curve.bandwidth;
      entry["grid"] = curve.grid;
      entry["density"] = curve.density;
      curves.push_back(std::move(entry));
    }
    OrderedJson group;
    group["label"] = data.group_labels[g];
    group["n"] = std::count(data.row_group.begin(), data.row_group.end(), g);
    group["curves"] = std::move(curves);
    groups.push_back(std::move(group));
  }
  j["groups"] = std::move(groups);
  return j.dump(2) + "\n";
}

// ---- band L1 maps ----

std::string_view BandModeName(BandMode mode) {
  switch (mode) {
    case BandMode::kRed: return "red";
    case BandMode::kGreen: return "green";
    case BandMode::kBlue: return "blue";
    case BandMode::kAll: return "all";
  }
  return "all";
}

BandMode ParseBandMode(std::string_view name) {
  if (name == "red") return BandMode::kRed;
  if (name == "green") return BandMode::kGreen;
  if (name == "blue") return BandMode::kBlue;
  if (name == "all") return BandMode::kAll;
  throw InputError("unknown band '" + std::string(name) + "', expected red, green, blue or all");
}

double L1Map::min() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double L1Map::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

L1Map BandL1Map(const ImageTile& a, const ImageTile& b, BandMode mode) {
  if (!a.SameShape(b)) {
    throw InputError("shape mismatch: " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
  L1Map map;
  map.height = a.height();
  map.width = a.width();
  map.band_mode = mode;
  map.values.resize(static_cast<std::size_t>(a.height()) * a.width());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      double v = 0.0;
      for (int band = 0; band < 3; ++band) {
        if (mode != BandMode::kAll && static_cast<int>(mode) != band) continue;
        v += std::abs(static_cast<double>(a.at(y, x, band)) - static_cast<double>(b.at(y, x, band)));
      }
      map.values[static_cast<std::size_t>(y) * map.width + x] = v;
    }
  }
  return map;
}

L1Scale SaveL1Map(const L1Map& map, const std::filesystem::path& png_path,
                  const std::filesystem::path& sidecar_path) {
  if (map.values.empty()) throw InputError("cannot save an empty L1 map");
  L1Scale scale{map.min(), map.max()};
  Raster raster;
  raster.height = map.height;
  raster.width = map.width;
  raster.channels = 1;
  raster.bit_depth = 16;
  raster.samples.resize(map.values.size(), 0);
  if (!scale.flat()) {
    const double range = scale.max - scale.min;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      const double q = std::round((map.values[i] - scale.min) / range * 65535.0);
      raster.samples[i] = static_cast<std::uint16_t>(std::clamp(q, 0.0, 65535.0));
    }
  }
  WritePng(raster, png_path);

  OrderedJson j;
  j["band_mode"] = BandModeName(map.band_mode);
  j["combination"] = map.band_mode == BandMode::kAll ? "sum of per-band absolute differences"
                                                     : "absolute difference";
  j["height"] = map.height;
  j["width"] = map.width;
  j["min"] = scale.min;
  j["max"] = scale.max;
  j["flat"] = scale.flat();
  j["encoding"] = "value = min + q / 65535 * (max - min); flat maps store q = 0";
  WriteText(sidecar_path, j.dump(2) + "\n");
  return scale;
}

L1Map LoadL1Map(const std::filesystem::path& png_path,
                const std::filesystem::path& sidecar_path) {
  const Raster raster = ReadRaster(png_path);
  OrderedJson j;
  try {
    j = OrderedJson::parse(ReadText(sidecar_path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid L1 sidecar '" + sidecar_path.string() + "': " + e.what());
  }
  if (raster.channels != 1) throw InputError("L1 map PNG must be single-channel");
  L1Map map;
  map.height = raster.height;
  map.width = raster.width;
  map.band_mode = ParseBandMode(j.value("band_mode", std::string("all")));
  const double lo = j.at("min").get<double>();
  const double hi = j.at("max").get<double>();
  const double full = raster.max_value();
  map.values.resize(raster.samples.size());
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    map.values[i] = hi > lo ? lo + raster.samples[i] / full * (hi - lo) : lo;
  }
  return map;
}

// ---- trend statistics ----

std::vector<double> AverageRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InputError("spearman: length mismatch " + std::to_string(xs.size()) + " vs " +
                     std::to_string(ys.size()));
  }
  if (xs.size() < 3) throw InputError("spearman needs at least 3 points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InputError("spearman input contains non-finite values");
    }
  }
  const auto rx = AverageRanks(xs);
  const auto ry = AverageRanks(ys);
  const double mean = 0.5 * static_cast<double>(xs.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw ComputationError("spearman: zero rank variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---- epoch series ----

MetricSeries EpochSeries(const FeatureMatrix& real, std::span<const EpochFeatures> epochs,
                         const cst::CstParams& params, const FidInputs* fid) {
  params.Validate();
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    if (epochs[i].features == nullptr) throw InputError("epoch series: missing features");
    if (i > 0 && epochs[i].epoch <= epochs[i - 1].epoch) {
      throw InputError("epoch series: epochs not strictly increasing");
    }
    if (epochs[i].features->cols() != real.cols()) {
      throw InputError("epoch " + std::to_string(epochs[i].epoch) + " has dimension " +
                       std::to_string(epochs[i].features->cols()) + ", real set has " +
                       std::to_string(real.cols()));
    }
  }
  if (fid != nullptr) {
    if (fid->real == nullptr || fid->epochs.size() != epochs.size()) {
      throw InputError("FID features must cover the real set and every epoch");
    }
    for (const FeatureMatrix* m : fid->epochs) {
      if (m == nullptr || m->cols() != fid->real->cols()) {
        throw InputError("FID feature dimensions do not match");
      }
    }
  }

  const GaussianSummary real_summary = FitGaussian(real);
  std::optional<GaussianSummary> fid_real;
  if (fid != nullptr) fid_real = FitGaussian(*fid->real);

  MetricSeries series;
  series.cst_params = params;
  series.records.resize(epochs.size());
  ParallelFor(epochs.size(), [&](std::size_t i) {
    const FeatureMatrix& gen = *epochs[i].features;
    EpochRecord& rec = series.records[i];
    rec.epoch = epochs[i].epoch;
    rec.n_generated = gen.rows();
    rec.n_real = real.rows();
    rec.frd = FrechetDistance(FitGaussian(gen), real_summary).value;
    rec.crd_distance = Crd(gen, real).distance;
    const cst::CstReport report = cst::TwoSampleTest(gen, real, params);
    rec.rf_mean_logloss = report.mean_logloss;
    rec.rf_std_logloss = report.std_logloss;
    if (fid != nullptr) {
      rec.fid = FrechetDistance(FitGaussian(*fid->epochs[i]), *fid_real).value;
    }
  });

  if (series.records.size() >= kMinTrendPoints) {
    std::vector<double> x, frd, crd, logloss, fid_values;
    for (const auto& r : series.records) {
      x.push_back(static_cast<double>(r.epoch));
      frd.push_back(r.frd);
      crd.push_back(r.crd_distance);
      logloss.push_back(r.rf_mean_logloss);
      if (r.fid) fid_values.push_back(*r.fid);
    }
    SeriesTrend trend;
    trend.frd = TryTrend(x, frd);
    trend.crd_distance = TryTrend(x, crd);
    trend.rf_mean_logloss = TryTrend(x, logloss);
    if (fid_values.size() == x.size()) trend.fid = TryTrend(x, fid_values);
    series.trend = trend;
  }
  return series;
}

std::string FormatNumber(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string SeriesCsv(const MetricSeries& series) {
  std::string out =
      "epoch,fid,frd,crd_distance,rf_mean_logloss,rf_std_logloss,n_generated,n_real\n";
  for (const auto& r : series.records) {
    out += std::to_string(r.epoch) + ',';
    if (r.fid) out += FormatNumber(*r.fid);
    out += ',' + FormatNumber(r.frd) + ',' + FormatNumber(r.crd_distance) + ',' +
           FormatNumber(r.rf_mean_logloss) + ',' + FormatNumber(r.rf_std_logloss) + ',' +
           std::to_string(r.n_generated) + ',' + std::to_string(r.n_real) + '\n';
  }
  return out;
}

std::string SeriesJson(const MetricSeries& series,
                       std::span<const std::pair<std::string, std::string>> metadata) {
  OrderedJson j;
  for (const auto& [key, value] : metadata) j[key] = value;
  j["cst_params"] = OrderedJson::parse(cst::ParamsToJson(series.cst_params));
  OrderedJson records = OrderedJson::array();
  for (const auto& r : series.records) {
    OrderedJson rec;
    rec["epoch"] = r.epoch;
    rec["fid"] = OptionalJson(r.fid);
    rec["frd"] = r.frd;
    rec["crd_distance"] = r.crd_distance;
    rec["rf_mean_logloss"] = r.rf_mean_logloss;
    rec["rf_std_logloss"] = r.rf_std_logloss;
    rec["n_generated"] = r.n_generated;
    rec["n_real"] = r.n_real;
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);
  if (series.trend) {
    OrderedJson t;
    t["method"] = "spearman";
    t["fid"] = OptionalJson(series.trend->fid);
    t["frd"] = OptionalJson(series.trend->frd);
    t["crd_distance"] = OptionalJson(series.trend->crd_distance);
    t["rf_mean_logloss"] = OptionalJson(series.trend->rf_mean_logloss);
    j["trend"] = std::move(t);
  }
  return j.dump(2) + "\n";
}

}  // namespace transeval

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
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "transeval/error.hpp"
#include "transeval/fixtures.hpp"
#include "transeval/metrics.hpp"
#include "transeval/rng.hpp"

namespace transeval {
namespace {

Eigen::MatrixXd Normals(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  rng::CounterStream s(seed);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = s.NextNormal();
  return m;
}

FeatureMatrix Gaussian(std::size_t n, std::size_t d, double mean, std::uint64_t seed) {
  return fixtures::GenGaussianFeatures(
      {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), mean),
       Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)), n, seed});
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// PCA

TEST(Pca, LineRecoversDirection) {
  Eigen::MatrixXd x(5, 2);
  for (int i = 0; i < 5; ++i) x.row(i) << i - 2.0, 2.0 * (i - 2.0);
  const PcaModel m = PcaFit(x, 1);
  EXPECT_NEAR(m.components(0, 0), 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(m.components(0, 1), 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(m.explained_variance(0) / m.total_variance, 1.0, 1e-12);
}

TEST(Pca, FullRankCapturesTotalVariance) {
  const Eigen::MatrixXd x = Normals(40, 5, 1);
  const PcaModel m = PcaFit(x, 5);
  EXPECT_NEAR(m.explained_variance.sum(), m.total_variance, 1e-10);
  const Eigen::MatrixXd gram = m.components * m.components.transpose();
  EXPECT_TRUE(gram.isApprox(Eigen::MatrixXd::Identity(5, 5), 1e-12));
  for (int i = 1; i < 5; ++i) EXPECT_GE(m.explained_variance(i - 1), m.explained_variance(i));
}

TEST(Pca, ProjectionMatchesCovarianceEigenOracle) {
  const Eigen::MatrixXd x = Normals(60, 4, 2) * Eigen::Vector4d(3, 2, 1, 0.5).asDiagonal();
  const PcaModel m = PcaFit(x, 2);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 59.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  for (int c = 0; c < 2; ++c) {
    const Eigen::VectorXd v = es.eigenvectors().col(3 - c);
    EXPECT_NEAR(m.explained_variance(c), es.eigenvalues()(3 - c), 1e-10);
    EXPECT_NEAR(std::abs(m.components.row(c).dot(v)), 1.0, 1e-10);
    const Eigen::VectorXd scores = PcaProject(m, x).col(c);
    EXPECT_TRUE(scores.isApprox(centered * m.components.row(c).transpose(), 1e-12));
  }
}

TEST(Pca, ReconstructionFromAllComponents) {
  const Eigen::MatrixXd x = Normals(10, 3, 3);
  const PcaModel m = PcaFit(x, 3);
  const Eigen::MatrixXd back =
      (PcaProject(m, x) * m.components).rowwise() + m.mean.transpose();
  EXPECT_TRUE(back.isApprox(x, 1e-12));
}

TEST(Pca, Errors) {
  EXPECT_THROW(PcaFit(Normals(1, 3, 1), 1), InputError);
  EXPECT_THROW(PcaFit(Normals(5, 3, 1), 0), InputError);
  EXPECT_THROW(PcaFit(Normals(3, 5, 1), 3), InputError);
}

// Kernel density

TEST(Kde, SymmetricSampleGivesSymmetricCurve) {
  const std::vector<double> v = {-2, -1, 0, 1, 2};
  const DensityCurve c = Kde1d(v, 101);
  ASSERT_EQ(c.grid.size(), 101u);
  for (std::size_t i = 0; i < 101; ++i) {
    EXPECT_NEAR(c.grid[i], -c.grid[100 - i], 1e-12);
    EXPECT_NEAR(c.density[i], c.density[100 - i], 1e-12);
  }
}

TEST(Kde, ScottBandwidthAndUnitMass) {
  const std::vector<double> v = {0.3, -1.2, 2.5, 0.0, 0.7};
  const DensityCurve c = Kde1d(v);
  const double mean = Mean(v);
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / 4.0);
  EXPECT_NEAR(c.bandwidth, sd * std::pow(5.0, -0.2), 1e-12);
  EXPECT_NEAR(c.Integral(), 1.0, 1e-3);
  EXPECT_NEAR(KdeAt(v, c.bandwidth, c.grid[128]), c.density[128], 1e-12);
}

TEST(Kde, LargeNormalSampleMatchesDensity) {
  const Eigen::MatrixXd x = Normals(5000, 1, 4);
  const std::vector<double> v(x.data(), x.data() + x.size());
  const DensityCurve c = Kde1d(v);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double pdf = std::exp(-0.5 * c.grid[i] * c.grid[i]) / std::sqrt(2 * std::numbers::pi);
    worst = std::max(worst, std::abs(c.density[i] - pdf));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Kde, DegenerateInputs) {
  const std::vector<double> same = {1.5, 1.5, 1.5};
  EXPECT_THROW(Kde1d(same), InputError);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(Kde1d(one), std::exception);
  const std::vector<double> close = {1.0, 1.0 + 1e-9};
  const DensityCurve c = Kde1d(close);
  EXPECT_GT(c.bandwidth, 0.0);
  EXPECT_NEAR(c.Integral(), 1.0, 1e-3);
}

TEST(Kde, EpsilonPairPeak) {
  const double eps = 1e-6;
  const std::vector<double> pair = {0.0, eps};
  const DensityCurve c = Kde1d(pair, 257);
  const double h = eps / std::sqrt(2.0) * std::pow(2.0, -0.2);
  EXPECT_NEAR(c.bandwidth, h, 1e-12 * h);
  const double peak = std::exp(-0.5 * std::pow(0.5 * eps / h, 2)) / (h * std::sqrt(2 * std::numbers::pi));
  EXPECT_NEAR(c.density[128], peak, 1e-6 * peak);
  EXPECT_EQ(*std::max_element(c.density.begin(), c.density.end()), c.density[128]);
}

// Wasserstein

TEST(Wasserstein, ReferenceValues) {
  const std::vector<double> a = {0, 1, 3}, b = {5, 6, 8, 9.5};
  EXPECT_NEAR(Wasserstein1d(a, b), 5.791666666666666, 1e-12);
  const std::vector<double> c = {0.3, -1.2, 2.5, 0, 0.7}, d = {1.1, 0.2, -0.4};
  EXPECT_NEAR(Wasserstein1d(c, d), 0.6133333333333333, 1e-12);
  EXPECT_NEAR(Wasserstein1d(d, c), 0.6133333333333333, 1e-12);
  EXPECT_EQ(Wasserstein1d(a, a), 0.0);
}

// Pair plot

TEST(Pairplot, IdenticalGroupsShareProjectionsAndCurves) {
  const FeatureMatrix g = Gaussian(50, 6, 0.0, 1);
  const PairplotGroup groups[] = {{"a", &g}, {"b", &g}};
  const PairplotExport e = ExportPairplot(groups);
  ASSERT_EQ(e.k(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(e.GroupScores(0, c), e.GroupScores(1, c));
    EXPECT_EQ(e.curves[0][c].density, e.curves[1][c].density);
    EXPECT_EQ(Wasserstein1d(e.GroupScores(0, c), e.GroupScores(1, c)), 0.0);
  }
}

TEST(Pairplot, ShapesAndCsv) {
  const FeatureMatrix a = Gaussian(20, 5, 0.0, 1), b = Gaussian(30, 5, 0.5, 2),
                      c = Gaussian(25, 5, 1.0, 3);
  const PairplotGroup groups[] = {{"epoch_1", &a}, {"epoch_2", &b}, {"real", &c}};
  const PairplotExport e = ExportPairplot(groups, 3, 64);
  EXPECT_EQ(e.scores.rows(), 75);
  EXPECT_EQ(e.curves.size(), 3u);
  for (const auto& per_group : e.curves) {
    ASSERT_EQ(per_group.size(), 3u);
    for (const auto& curve : per_group) EXPECT_EQ(curve.grid.size(), 64u);
  }
  const std::string csv = PairplotCsv(e);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "group,pc1,pc2,pc3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 76);
  const auto j = nlohmann::json::parse(PairplotDensityJson(e));
  EXPECT_EQ(j["k"], 3);
  EXPECT_EQ(j["groups"].size(), 3u);
  EXPECT_EQ(j["groups"][1]["label"], "epoch_2");
  EXPECT_EQ(j["groups"][1]["n"], 30);
}

TEST(Pairplot, CloserGroupHasSmallerWasserstein) {
  const FeatureMatrix real = Gaussian(200, 8, 0.0, 1);
  const FeatureMatrix near = Gaussian(200, 8, 0.2, 2), far = Gaussian(200, 8, 2.0, 3);
  const PairplotGroup groups[] = {{"near", &near}, {"far", &far}, {"real", &real}};
  const PairplotExport e = ExportPairplot(groups, 1);
  EXPECT_LT(Wasserstein1d(e.GroupScores(0, 0), e.GroupScores(2, 0)),
            Wasserstein1d(e.GroupScores(1, 0), e.GroupScores(2, 0)));
}

TEST(Pairplot, RowPermutationLeavesCurvesUnchanged) {
  const FeatureMatrix a = Gaussian(40, 4, 0.0, 5), b = Gaussian(40, 4, 1.0, 6);
  std::vector<std::size_t> rev(40);
  for (std::size_t i = 0; i < 40; ++i) rev[i] = 39 - i;
  const FeatureMatrix a_rev = a.SelectRows(rev);
  const PairplotGroup g1[] = {{"a", &a}, {"b", &b}}, g2[] = {{"a", &a_rev}, {"b", &b}};
  const PairplotExport e1 = ExportPairplot(g1, 2), e2 = ExportPairplot(g2, 2);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t g = 0; g < 2; ++g) {
      EXPECT_NEAR(e1.curves[g][c].bandwidth, e2.curves[g][c].bandwidth, 1e-9);
      for (std::size_t i = 0; i < e1.curves[g][c].density.size(); i += 17) {
        EXPECT_NEAR(e1.curves[g][c].density[i], e2.curves[g][c].density[i], 1e-9);
      }
    }
  }
}

TEST(Pairplot, NeedsTwoGroups) {
  const FeatureMatrix a = Gaussian(10, 4, 0.0, 1);
  const PairplotGroup one[] = {{"a", &a}};
  EXPECT_THROW(ExportPairplot(one), InputError);
}

// Band L1

TEST(BandL1, IdenticalImagesGiveZeroMap) {
  const ImageTile t = fixtures::GenBaseTile(6, 7, 1);
  const L1Map m = BandL1Map(t, t, BandMode::kAll);
  EXPECT_EQ(m.min(), 0.0);
  EXPECT_EQ(m.max(), 0.0);
  EXPECT_EQ(m.values.size(), 42u);
}

TEST(BandL1, RedShiftIsExactOnRedBand) {
  const auto fx = fixtures::GenShiftFixture(16, 16, 0, 0.25, 3);
  const L1Map red = BandL1Map(fx.base, fx.shifted, BandMode::kRed);
  EXPECT_EQ(red.min(), 0.25);
  EXPECT_EQ(red.max(), 0.25);
  EXPECT_EQ(BandL1Map(fx.base, fx.shifted, BandMode::kGreen).max(), 0.0);
  EXPECT_EQ(BandL1Map(fx.base, fx.shifted, BandMode::kAll).max(), 0.25);
}

TEST(BandL1, SymmetricInArguments) {
  const ImageTile a = fixtures::GenBaseTile(5, 5, 1), b = fixtures::GenBaseTile(5, 5, 2);
  EXPECT_EQ(BandL1Map(a, b, BandMode::kAll).values, BandL1Map(b, a, BandMode::kAll).values);
}

TEST(BandL1, GridHighlightsLattice) {
  const ImageTile base = fixtures::GenBaseTile(32, 32, 4, 0.5);
  const ImageTile grid = fixtures::GenGridImage(base, 8, 0.3);
  const L1Map m = BandL1Map(base, grid, BandMode::kBlue);
  const auto lattice = fixtures::GridLattice(32, 32, 8);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const double v = m.at(y, x);
      if (lattice[static_cast<std::size_t>(y) * 32 + x]) {
        EXPECT_NEAR(v, 0.3, 1e-6);
      } else {
        EXPECT_EQ(v, 0.0);
      }
    }
}

TEST(BandL1, ShapeMismatch) {
  EXPECT_THROW(BandL1Map(ImageTile(2, 2), ImageTile(2, 3), BandMode::kAll), InputError);
}

TEST(BandL1, ModeNames) {
  for (BandMode m : {BandMode::kRed, BandMode::kGreen, BandMode::kBlue, BandMode::kAll}) {
    EXPECT_EQ(ParseBandMode(BandModeName(m)), m);
  }
  EXPECT_THROW(ParseBandMode("alpha"), InputError);
}

TEST(BandL1, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const ImageTile a = fixtures::GenBaseTile(9, 11, 1), b = fixtures::GenBaseTile(9, 11, 2);
  const L1Map m = BandL1Map(a, b, BandMode::kAll);
  const L1Scale scale = SaveL1Map(m, dir / "l1.png", dir / "l1.json");
  EXPECT_EQ(scale.min, m.min());
  EXPECT_EQ(scale.max, m.max());
  const L1Map back = LoadL1Map(dir / "l1.png", dir / "l1.json");
  ASSERT_EQ(back.values.size(), m.values.size());
  EXPECT_EQ(back.band_mode, BandMode::kAll);
  const double step = (m.max() - m.min()) / 65535.0;
  for (std::size_t i = 0; i < m.values.size(); ++i)
    EXPECT_NEAR(back.values[i], m.values[i], 0.5 * step + 1e-12);
}

TEST(BandL1, FlatMapRoundTrip) {
  testing::TempDir dir;
  const ImageTile a = fixtures::GenBaseTile(4, 4, 1);
  const L1Scale scale =
      SaveL1Map(BandL1Map(a, a, BandMode::kRed), dir / "z.png", dir / "z.json");
  EXPECT_TRUE(scale.flat());
  const L1Map back = LoadL1Map(dir / "z.png", dir / "z.json");
  for (double v : back.values) EXPECT_EQ(v, 0.0);
  const auto j = nlohmann::json::parse(testing::ReadAll(dir / "z.json"));
  EXPECT_EQ(j["flat"], true);
  EXPECT_EQ(j["band_mode"], "red");
}

// Spearman

TEST(Spearman, ReferenceValues) {
  const std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> ys = {3.1, 1.2, 1.2, 5.5, 4.0, 9.9, 7.7, 7.7, 7.7, 2.0};
  EXPECT_NEAR(Spearman(xs, ys), 0.4923659639173309, 1e-12);
  const std::vector<double> xs2 = {0.5, 0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6, 0.0};
  const std::vector<double> ys2 = {2, 9, 4, 4, 1, 7, 3, 8, 5, 6};
  EXPECT_NEAR(Spearman(xs2, ys2), -0.6626170426112704, 1e-12);
}

TEST(Spearman, MonotoneExtremes) {
  const std::vector<double> x = {1, 2, 3, 4}, up = {1, 4, 9, 16}, down = {5, 3, 1, -7};
  EXPECT_DOUBLE_EQ(Spearman(x, up), 1.0);
  EXPECT_DOUBLE_EQ(Spearman(x, down), -1.0);
}

TEST(Spearman, AverageRanksForTies) {
  const std::vector<double> v = {10, 20, 10, 30, 20, 20};
  EXPECT_EQ(AverageRanks(v), (std::vector<double>{1.5, 4, 1.5, 6, 4, 4}));
}

TEST(Spearman, Errors) {
  const std::vector<double> three = {1, 2, 3}, two = {1, 2}, flat = {4, 4, 4};
  const std::vector<double> nan = {1, std::nan(""), 3};
  EXPECT_THROW(Spearman(three, two), InputError);
  EXPECT_THROW(Spearman(two, two), InputError);
  EXPECT_THROW(Spearman(three, nan), InputError);
  EXPECT_THROW(Spearman(three, flat), ComputationError);
}

// Epoch series

cst::CstParams FastCst() {
  cst::CstParams p;
  p.n_trees = 20;
  p.n_repeats = 3;
  p.master_seed = 5;
  return p;
}

TEST(EpochSeries, GeneratedEqualToRealGivesZeroDistances) {
  const FeatureMatrix real = Gaussian(60, 6, 0.0, 1);
  const EpochFeatures epochs[] = {{1, &real}};
  const MetricSeries s = EpochSeries(real, epochs, FastCst());
  ASSERT_EQ(s.records.size(), 1u);
  EXPECT_NEAR(s.records[0].frd, 0.0, 1e-6);
  EXPECT_FALSE(s.trend.has_value());
  EXPECT_FALSE(s.records[0].fid.has_value());
  EXPECT_EQ(s.records[0].n_generated, 60u);
  EXPECT_EQ(s.records[0].n_real, 60u);
}

TEST(EpochSeries, ConvergenceTrends) {
  const auto fx = fixtures::GenConvergenceFixture(8, 80, 5, 17);
  std::vector<EpochFeatures> epochs;
  for (const auto& [t, f] : fx.epochs) epochs.push_back({t, &f});
  const MetricSeries s = EpochSeries(fx.real, epochs, FastCst());
  ASSERT_EQ(s.records.size(), 5u);
  ASSERT_TRUE(s.trend.has_value());
  EXPECT_DOUBLE_EQ(*s.trend->frd, -1.0);
  EXPECT_DOUBLE_EQ(*s.trend->crd_distance, -1.0);
  EXPECT_DOUBLE_EQ(*s.trend->rf_mean_logloss, 1.0);
  EXPECT_FALSE(s.trend->fid.has_value());
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(s.records[i].epoch, static_cast<std::int64_t>(i + 1));
    const auto fd = FrechetDistance(FitGaussian(fx.epochs[i].second), FitGaussian(fx.real));
    EXPECT_DOUBLE_EQ(s.records[i].frd, fd.value);
  }
}

TEST(EpochSeries, FidColumnFromSecondSpace) {
  const auto fx = fixtures::GenConvergenceFixture(4, 40, 3, 2);
  std::vector<EpochFeatures> epochs;
  FidInputs fid{&fx.real, {}};
  for (const auto& [t, f] : fx.epochs) {
    epochs.push_back({t, &f});
    fid.epochs.push_back(&f);
  }
  const MetricSeries s = EpochSeries(fx.real, epochs, FastCst(), &fid);
  for (const auto& r : s.records) {
    ASSERT_TRUE(r.fid.has_value());
    EXPECT_DOUBLE_EQ(*r.fid, r.frd);
  }
  ASSERT_TRUE(s.trend->fid.has_value());
  EXPECT_DOUBLE_EQ(*s.trend->fid, -1.0);
}

TEST(EpochSeries, SerializationIsDeterministic) {
  const auto fx = fixtures::GenConvergenceFixture(4, 40, 3, 9);
  std::vector<EpochFeatures> epochs;
  for (const auto& [t, f] : fx.epochs) epochs.push_back({t, &f});
  const MetricSeries a = EpochSeries(fx.real, epochs, FastCst());
  const MetricSeries b = EpochSeries(fx.real, epochs, FastCst());
  EXPECT_EQ(a, b);
  EXPECT_EQ(SeriesCsv(a), SeriesCsv(b));
  const std::pair<std::string, std::string> meta[] = {{"generator", "test"}};
  EXPECT_EQ(SeriesJson(a, meta), SeriesJson(b, meta));
  const std::string csv = SeriesCsv(a);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,fid,frd,crd_distance,rf_mean_logloss,rf_std_logloss,n_generated,n_real");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto j = nlohmann::json::parse(SeriesJson(a, meta));
  EXPECT_EQ(j["generator"], "test");
  EXPECT_EQ(j["records"].size(), 3u);
  EXPECT_EQ(j["trend"]["method"], "spearman");
  EXPECT_EQ(j["cst_params"]["n_trees"], 20);
}

TEST(EpochSeries, TwoEpochsHaveNoTrend) {
  const auto fx = fixtures::GenConvergenceFixture(4, 30, 3, 9);
  const EpochFeatures epochs[] = {{1, &fx.epochs[0].second}, {2, &fx.epochs[1].second}};
  const MetricSeries s = EpochSeries(fx.real, epochs, FastCst());
  EXPECT_FALSE(s.trend.has_value());
  EXPECT_FALSE(nlohmann::json::parse(SeriesJson(s)).contains("trend"));
}

TEST(FormatNumber, Precision) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(FormatNumber(12345678901.0), "1.23456789e+10");
}

}  // namespace
}  // namespace transeval

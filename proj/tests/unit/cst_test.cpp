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

#include "transeval/cst.hpp"

#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "transeval/error.hpp"
#include "transeval/fixtures.hpp"
#include "transeval/rng.hpp"

namespace transeval::cst {
namespace {

CstParams Small(std::size_t trees = 20, std::size_t repeats = 3) {
  CstParams p;
  p.n_trees = trees;
  p.n_repeats = repeats;
  p.master_seed = 11;
  return p;
}

FeatureMatrix Gaussian(std::size_t n, std::size_t d, double mean, std::uint64_t seed) {
  return fixtures::GenGaussianFeatures(
      {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), mean),
       Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)), n, seed});
}

std::vector<std::size_t> All(std::size_t n) {
  std::vector<std::size_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

TEST(CstParams, Validation) {
  EXPECT_NO_THROW(CstParams{}.Validate());
  auto bad = [](auto mutate) {
    CstParams p;
    mutate(p);
    return p;
  };
  EXPECT_THROW(bad([](CstParams& p) { p.n_trees = 0; }).Validate(), InputError);
  EXPECT_THROW(bad([](CstParams& p) { p.n_folds = 1; }).Validate(), InputError);
  EXPECT_THROW(bad([](CstParams& p) { p.n_repeats = 0; }).Validate(), InputError);
  EXPECT_THROW(bad([](CstParams& p) { p.min_leaf = 0; }).Validate(), InputError);
  EXPECT_THROW(bad([](CstParams& p) { p.clip_epsilon = 0.5; }).Validate(), InputError);
  EXPECT_THROW(bad([](CstParams& p) { p.clip_epsilon = 0.0; }).Validate(), InputError);
  EXPECT_THROW(bad([](CstParams& p) { p.features_per_split = FeaturesPerSplit::Fixed(0); })
                   .Validate(),
               InputError);
}

TEST(CstParams, FeaturesPerSplit) {
  CstParams p;
  EXPECT_EQ(p.FeaturesFor(1), 1u);
  EXPECT_EQ(p.FeaturesFor(16), 4u);
  EXPECT_EQ(p.FeaturesFor(17), 5u);
  EXPECT_EQ(p.FeaturesFor(2048), 46u);
  p.features_per_split = FeaturesPerSplit::Fixed(8);
  EXPECT_EQ(p.FeaturesFor(3), 3u);
  EXPECT_EQ(p.FeaturesFor(100), 8u);
}

TEST(GrowTree, SingleSplitAtMidpoint) {
  const FeatureMatrix f(2, 1, {0, 1});
  const std::vector<int> y = {0, 1};
  CstParams p;
  p.bootstrap = false;
  const auto samples = All(2);
  const DecisionTree t = GrowTree(f, y, samples, p, 1, 0);
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_EQ(t.nodes[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes[0].threshold, 0.5);
  const float x0[] = {0.0f}, x1[] = {1.0f};
  EXPECT_EQ(t.LeafFor(x0).proba, (Proba{1.0, 0.0}));
  EXPECT_EQ(t.LeafFor(x1).proba, (Proba{0.0, 1.0}));
  EXPECT_EQ(t.depth(), 1u);
}

TEST(GrowTree, ConstantFeaturesGiveClassPrior) {
  const FeatureMatrix f(4, 2, std::vector<float>(8, 3.0f));
  const std::vector<int> y = {0, 1, 1, 1};
  const auto samples = All(4);
  const DecisionTree t = GrowTree(f, y, samples, CstParams{}, 1, 0);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].proba, (Proba{0.25, 0.75}));
}

TEST(GrowTree, RespectsMaxDepthAndMinLeaf) {
  const FeatureMatrix f = Gaussian(200, 4, 0.0, 5);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = f.at(i, 0) * f.at(i, 1) > 0;
  CstParams p;
  p.max_depth = 3;
  p.min_leaf = 7;
  const auto samples = All(200);
  const DecisionTree t = GrowTree(f, y, samples, p, 9, 0);
  EXPECT_LE(t.depth(), 3u);
  // Every leaf reached by training data holds at least min_leaf samples.
  std::map<const TreeNode*, int> counts;
  for (std::size_t i = 0; i < 200; ++i) ++counts[&t.LeafFor(f.row(i))];
  for (const auto& [leaf, n] : counts) EXPECT_GE(n, 7);
}

TEST(Forest, LeafProbabilitiesSumToOne) {
  const FeatureMatrix f = Gaussian(60, 3, 0.0, 1);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = i % 3 == 0;
  const Forest forest = TrainForest(f, y, Small(), 4);
  for (const auto& tree : forest.trees) {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        EXPECT_NEAR(node.proba[0] + node.proba[1], 1.0, 1e-15);
      }
    }
  }
  for (const auto& p : PredictProba(forest, f)) EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
}

TEST(Forest, LearnsXor) {
  std::vector<float> data;
  std::vector<int> y;
  for (int rep = 0; rep < 25; ++rep) {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        data.push_back(static_cast<float>(a));
        data.push_back(static_cast<float>(b));
        y.push_back(a ^ b);
      }
  }
  const FeatureMatrix f(100, 2, data);
  CstParams p;
  p.n_trees = 100;
  const Forest forest = TrainForest(f, y, p, 3);
  const auto probs = PredictProba(forest, f);
  int correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) correct += (probs[i][1] > 0.5) == (y[i] == 1);
  EXPECT_EQ(correct, 100);
}

TEST(Forest, DeterministicAndSeedSensitive) {
  const FeatureMatrix f = Gaussian(80, 5, 0.0, 2);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = i < 40;
  const auto a = PredictProba(TrainForest(f, y, Small(), 7), f);
  const auto b = PredictProba(TrainForest(f, y, Small(), 7), f);
  const auto c = PredictProba(TrainForest(f, y, Small(), 8), f);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Forest, RejectsBadLabels) {
  const FeatureMatrix f(3, 1, {0, 1, 2});
  const std::vector<int> one_class = {1, 1, 1}, bad_value = {0, 1, 2}, short_labels = {0, 1};
  EXPECT_THROW(TrainForest(f, one_class, Small(), 1), InputError);
  EXPECT_THROW(TrainForest(f, bad_value, Small(), 1), InputError);
  EXPECT_THROW(TrainForest(f, short_labels, Small(), 1), InputError);
}

TEST(LogLoss, ReferenceValues) {
  const std::vector<int> y = {0, 1};
  const std::vector<Proba> half = {{0.5, 0.5}, {0.5, 0.5}};
  EXPECT_NEAR(LogLoss(half, y, 1e-15), std::log(2.0), 1e-15);
  const std::vector<Proba> confident = {{0.9, 0.1}, {0.1, 0.9}};
  EXPECT_NEAR(LogLoss(confident, y, 1e-15), 0.10536051565782628, 1e-15);
  const std::vector<Proba> perfect = {{1.0, 0.0}, {0.0, 1.0}};
  EXPECT_DOUBLE_EQ(LogLoss(perfect, y, 1e-15), -std::log(1.0 - 1e-15));
  const std::vector<Proba> wrong = {{0.0, 1.0}, {1.0, 0.0}};
  EXPECT_NEAR(LogLoss(wrong, y, 1e-15), -std::log(1e-15), 1e-9);
}

TEST(StratifiedFolds, BalancesEachClass) {
  std::vector<int> y(103);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i * 7) % 5 < 2;
  for (std::size_t k : {2u, 3u, 5u}) {
    const auto folds = StratifiedFolds(y, k, 42);
    std::vector<std::array<int, 2>> count(k, {0, 0});
    for (std::size_t i = 0; i < y.size(); ++i) {
      ASSERT_LT(folds[i], k);
      ++count[folds[i]][y[i]];
    }
    for (int c = 0; c < 2; ++c) {
      int lo = count[0][c], hi = count[0][c];
      for (const auto& fc : count) {
        lo = std::min(lo, fc[c]);
        hi = std::max(hi, fc[c]);
      }
      EXPECT_LE(hi - lo, 1) << "k=" << k << " class " << c;
    }
  }
}

TEST(StratifiedFolds, InvariantUnderLabelFlip) {
  std::vector<int> y(50), flipped(50);
  for (std::size_t i = 0; i < 50; ++i) {
    y[i] = i % 4 == 1;
    flipped[i] = 1 - y[i];
  }
  EXPECT_EQ(StratifiedFolds(y, 3, 9), StratifiedFolds(flipped, 3, 9));
}

TEST(CrossValidation, SymmetricInClassLabels) {
  const FeatureMatrix g = Gaussian(40, 4, 0.0, 3), r = Gaussian(40, 4, 0.7, 4);
  const FeatureMatrix* parts[] = {&g, &r};
  const FeatureMatrix f = FeatureMatrix::Concat(parts);
  std::vector<int> y(80), flipped(80);
  for (std::size_t i = 0; i < 80; ++i) {
    y[i] = i >= 40;
    flipped[i] = 1 - y[i];
  }
  EXPECT_DOUBLE_EQ(CrossValidatedLogLoss(f, y, Small(), 5),
                   CrossValidatedLogLoss(f, flipped, Small(), 5));
}

TEST(CrossValidation, TooFewSamplesPerClass) {
  const FeatureMatrix f(3, 1, {0, 1, 2});
  const std::vector<int> y = {0, 1, 1};
  EXPECT_THROW(CrossValidatedLogLoss(f, y, Small(), 1), InputError);
}

TEST(TwoSampleTest, SeparatedSetsHaveLowLoss) {
  const auto report = TwoSampleTest(Gaussian(50, 4, 0.0, 1), Gaussian(50, 4, 10.0, 2), Small());
  EXPECT_LT(report.mean_logloss, 0.05);
  EXPECT_EQ(report.per_repeat.size(), 3u);
}

TEST(TwoSampleTest, SameDistributionNearChance) {
  const auto report =
      TwoSampleTest(Gaussian(100, 4, 0.0, 1), Gaussian(100, 4, 0.0, 2), Small(50, 5));
  EXPECT_GT(report.mean_logloss, 0.55);
  EXPECT_LT(report.mean_logloss, 0.9);
}

TEST(TwoSampleTest, DeterministicReportAndStd) {
  const FeatureMatrix g = Gaussian(30, 3, 0.0, 1), r = Gaussian(30, 3, 0.5, 2);
  const auto a = TwoSampleTest(g, r, Small());
  const auto b = TwoSampleTest(g, r, Small());
  EXPECT_EQ(a, b);
  EXPECT_EQ(ToJson(a), ToJson(b));
  double mean = 0.0, var = 0.0;
  for (double v : a.per_repeat) mean += v;
  mean /= static_cast<double>(a.per_repeat.size());
  for (double v : a.per_repeat) var += (v - mean) * (v - mean);
  var /= static_cast<double>(a.per_repeat.size());
  EXPECT_NEAR(a.mean_logloss, mean, 1e-15);
  EXPECT_NEAR(a.std_logloss, std::sqrt(var), 1e-15);
  EXPECT_EQ(a.params_echo, Small());
}

TEST(TwoSampleTest, JsonEchoesParameters) {
  CstParams p = Small();
  p.max_depth = 4;
  p.features_per_split = FeaturesPerSplit::Fixed(2);
  const auto j = nlohmann::json::parse(ParamsToJson(p));
  EXPECT_EQ(j["n_trees"], 20);
  EXPECT_EQ(j["max_depth"], 4);
  EXPECT_EQ(j["features_per_split"]["fixed"], 2);
  EXPECT_EQ(j["master_seed"], 11);
  EXPECT_TRUE(nlohmann::json::parse(ParamsToJson(CstParams{}))["max_depth"].is_null());
  EXPECT_EQ(nlohmann::json::parse(ParamsToJson(CstParams{}))["features_per_split"], "sqrt_d");
}

TEST(TwoSampleTest, DimensionMismatch) {
  EXPECT_THROW(TwoSampleTest(Gaussian(10, 3, 0, 1), Gaussian(10, 4, 0, 2), Small()), InputError);
}

}  // namespace
}  // namespace transeval::cst

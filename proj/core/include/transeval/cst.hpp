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

#ifndef TRANSEVAL_CST_HPP_
#define TRANSEVAL_CST_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "transeval/features.hpp"

// Classifier two-sample test: a random forest is trained to tell generated
// (label 0) from real (label 1) embeddings, and its repeated, stratified
// k-fold cross-validated log loss measures how separable the two sets are.
// ln 2 is chance level for balanced classes.
namespace transeval::cst {

struct FeaturesPerSplit {
  enum class Rule { kSqrtD, kFixed };
  Rule rule = Rule::kSqrtD;
  std::size_t k = 0;  // kFixed only

  static FeaturesPerSplit SqrtD() { return {}; }
  static FeaturesPerSplit Fixed(std::size_t k) { return {Rule::kFixed, k}; }
  friend bool operator==(const FeaturesPerSplit&, const FeaturesPerSplit&) = default;
};

struct CstParams {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_leaf = 1;
  FeaturesPerSplit features_per_split;
  std::size_t n_repeats = 100;
  std::size_t n_folds = 2;
  double clip_epsilon = 1e-15;
  std::uint64_t master_seed = 0;
  // Grow each tree on a bootstrap resample (N draws with replacement).
  bool bootstrap = true;

  void Validate() const;
  // Number of candidate features examined per split for dimension d.
  std::size_t FeaturesFor(std::size_t d) const;
  friend bool operator==(const CstParams&, const CstParams&) = default;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<double, 2> proba{};  // class distribution, leaves only

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& LeafFor(std::span<const float> x) const;
  std::size_t depth() const;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t n_features = 0;
};

using Labels = std::span<const int>;
using Proba = std::array<double, 2>;

// Tree t is grown from stream Derive(seed, t): N bootstrap draws first, then
// candidate-feature draws in depth-first (left child first) node order.
// Splits minimize weighted Gini impurity over midpoints between consecutive
// distinct values; ties go to the lowest feature index, then the lowest
// threshold. Throws InputError on empty or single-class input.
Forest TrainForest(const FeatureMatrix& features, Labels labels,
                   const CstParams& params, std::uint64_t seed);

// Grows one tree on the given sample indices (repeats allowed).
DecisionTree GrowTree(const FeatureMatrix& features, Labels labels,
                      std::span<const std::size_t> samples, const CstParams& params,
                      std::uint64_t stream_key, std::uint64_t stream_start);

// Mean of per-tree leaf distributions for every row.
std::vector<Proba> PredictProba(const Forest& forest, const FeatureMatrix& features);

// -(1/N) sum ln clip(p_i[y_i], eps, 1 - eps).
double LogLoss(std::span<const Proba> probs, Labels labels, double clip_epsilon);

// Fold index per sample. Samples are visited in a Fisher-Yates permutation
// drawn from `seed`; each goes to (number of same-class samples already
// visited) mod n_folds. Fold membership is unchanged when labels are
// flipped.
std::vector<std::size_t> StratifiedFolds(Labels labels, std::size_t n_folds,
                                         std::uint64_t seed);

// Mean held-out log loss over the folds of one repeat. Fold assignment uses
// Derive(repeat_seed, 0); the forest for fold f uses Derive(repeat_seed, 1+f).
double CrossValidatedLogLoss(const FeatureMatrix& features, Labels labels,
                             const CstParams& params, std::uint64_t repeat_seed);

struct CstReport {
  double mean_logloss = 0.0;
  double std_logloss = 0.0;  // population standard deviation over repeats
  std::vector<double> per_repeat;
  CstParams params_echo;

  friend bool operator==(const CstReport&, const CstReport&) = default;
};

// Repeat r uses repeat seed Derive(master_seed, r) on the row-wise
// concatenation [generated; real] labelled 0 and 1.
CstReport TwoSampleTest(const FeatureMatrix& generated, const FeatureMatrix& real,
                        const CstParams& params);

std::string ToJson(const CstReport& report, int indent = 2);
std::string ParamsToJson(const CstParams& params, int indent = -1);

}  // namespace transeval::cst

#endif  // TRANSEVAL_CST_HPP_

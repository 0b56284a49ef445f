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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <nlohmann/json.hpp>

#include "transeval/error.hpp"
#include "transeval/parallel.hpp"
#include "transeval/rng.hpp"

namespace transeval::cst {
namespace {

struct Split {
  bool found = false;
  double score = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

// Weighted Gini impurity scaled by the node size: sum over children of
// n_child * gini_child = 2 * c0 * c1 / n_child.
double ChildImpurity(double c0, double c1) {
  const double n = c0 + c1;
  return n > 0.0 ? 2.0 * c0 * c1 / n : 0.0;
}

bool Better(const Split& cand, const Split& best, double tolerance) {
  if (!best.found) return true;
  if (cand.score < best.score - tolerance) return true;
  if (cand.score > best.score + tolerance) return false;
  if (cand.feature != best.feature) return cand.feature < best.feature;
  return cand.threshold < best.threshold;
}

void CheckLabels(const FeatureMatrix& features, Labels labels) {
  if (features.empty()) throw InputError("cannot train on an empty feature matrix");
  if (labels.size() != features.rows()) {
    throw InputError("label count " + std::to_string(labels.size()) +
                     " does not match row count " + std::to_string(features.rows()));
  }
  bool seen[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) throw InputError("training data contains a single class");
}

// Best split of `samples` on one feature, or not-found. Sets `constant`
// when every sample shares one value.
Split BestSplitOnFeature(const FeatureMatrix& features, Labels labels,
                         std::span<const std::size_t> samples, std::int32_t feature,
                         std::size_t min_leaf, double tolerance, bool& constant) {
  std::vector<std::pair<float, int>> column;
  column.reserve(samples.size());
  for (std::size_t s : samples) column.emplace_back(features.at(s, feature), labels[s]);
  std::sort(column.begin(), column.end());
  constant = column.front().first == column.back().first;

  Split best;
  if (constant) return best;
  double total[2] = {0, 0};
  for (const auto& [v, y] : column) total[y] += 1.0;
  double left[2] = {0, 0};
  const std::size_t n = column.size();
  for (std::size_t i = 1; i < n; ++i) {
    left[column[i - 1].second] += 1.0;
    if (i < min_leaf || n - i < min_leaf) continue;
    if (!(column[i - 1].first < column[i].first)) continue;
    Split cand;
    cand.found = true;
    cand.feature = feature;
    cand.threshold = 0.5 * (static_cast<double>(column[i - 1].first) + column[i].first);
    cand.score = ChildImpurity(left[0], left[1]) +
                 ChildImpurity(total[0] - left[0], total[1] - left[1]);
    if (Better(cand, best, tolerance)) best = cand;
  }
  return best;
}

}  // namespace

void CstParams::Validate() const {
  if (n_trees < 1) throw InputError("n_trees must be >= 1");
  if (n_folds < 2) throw InputError("n_folds must be >= 2");
  if (n_repeats < 1) throw InputError("n_repeats must be >= 1");
  if (min_leaf < 1) throw InputError("min_leaf must be >= 1");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 0.5)) {
    throw InputError("clip_epsilon must lie in (0, 0.5)");
  }
  if (features_per_split.rule == FeaturesPerSplit::Rule::kFixed && features_per_split.k < 1) {
    throw InputError("fixed features_per_split must be >= 1");
  }
}

std::size_t CstParams::FeaturesFor(std::size_t d) const {
  if (features_per_split.rule == FeaturesPerSplit::Rule::kFixed) {
    return std::min(features_per_split.k, d);
  }
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  while (k * k < d) ++k;  // exact ceil for large d
  while (k > 1 && (k - 1) * (k - 1) >= d) --k;
  return std::max<std::size_t>(1, std::min(k, d));
}

const TreeNode& DecisionTree::LeafFor(std::span<const float> x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[x[node->feature] <= node->threshold ? node->left : node->right];
  }
  return *node;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::int32_t, std::size_t>> stack = {{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [index, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const TreeNode& n = nodes[index];
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return deepest;
}

DecisionTree GrowTree(const FeatureMatrix& features, Labels labels,
                      std::span<const std::size_t> samples, const CstParams& params,
                      std::uint64_t stream_key, std::uint64_t stream_start) {
  if (samples.empty()) throw InputError("cannot grow a tree on zero samples");
  const std::size_t d = features.cols();
  const std::size_t wanted = params.FeaturesFor(d);
  rng::CounterStream stream(stream_key, stream_start);

  struct Pending {
    std::int32_t node;
    std::vector<std::size_t> samples;
    std::size_t depth;
  };
  DecisionTree tree;
  tree.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::vector<std::size_t>(samples.begin(), samples.end()), 0});
  std::vector<std::int32_t> order(d);

  while (!stack.empty()) {
    Pending item = std::move(stack.back());
    stack.pop_back();
    const std::size_t n = item.samples.size();
    double counts[2] = {0, 0};
    for (std::size_t s : item.samples) counts[labels[s]] += 1.0;

    auto make_leaf = [&] {
      TreeNode& leaf = tree.nodes[item.node];
      leaf.feature = -1;
      leaf.proba = {counts[0] / static_cast<double>(n), counts[1] / static_cast<double>(n)};
    };

    const bool pure = counts[0] == 0.0 || counts[1] == 0.0;
    const bool too_small = n < 2 * params.min_leaf;
    const bool too_deep = params.max_depth && item.depth >= *params.max_depth;
    if (pure || too_small || too_deep) {
      make_leaf();
      continue;
    }

    // Candidate features come from a lazily drawn Fisher-Yates permutation;
    // constant features do not count towards the budget.
    std::iota(order.begin(), order.end(), 0);
    const double tolerance = 1e-12 * static_cast<double>(n);
    Split best;
    std::size_t examined = 0;
    for (std::size_t j = 0; j < d && examined < wanted; ++j) {
      const std::size_t pick = j + stream.NextIndex(d - j);
      std::swap(order[j], order[pick]);
      bool constant = false;
      const Split cand = BestSplitOnFeature(features, labels, item.samples, order[j],
                                            params.min_leaf, tolerance, constant);
      if (constant) continue;
      ++examined;
      if (cand.found && Better(cand, best, tolerance)) best = cand;
    }
    if (!best.found) {
      make_leaf();
      continue;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t s : item.samples) {
      (features.at(s, best.feature) <= best.threshold ? left : right).push_back(s);
    }
    const auto left_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[item.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_index;
    node.right = left_index + 1;
    stack.push_back({left_index + 1, std::move(right), item.depth + 1});
    stack.push_back({left_index, std::move(left), item.depth + 1});
  }
  return tree;
}

Forest TrainForest(const FeatureMatrix& features, Labels labels, const CstParams& params,
                   std::uint64_t seed) {
  params.Validate();
  CheckLabels(features, labels);
  const std::size_t n = features.rows();
  Forest forest;
  forest.n_features = features.cols();
  forest.trees.resize(params.n_trees);
  forest.tree_seeds.resize(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    forest.tree_seeds[t] = rng::Derive(seed, t);
  }
  ParallelFor(params.n_trees, [&](std::size_t t) {
    const std::uint64_t key = forest.tree_seeds[t];
    std::vector<std::size_t> samples(n);
    std::uint64_t start = 0;
    if (params.bootstrap) {
      rng::CounterStream draws(key);
      for (auto& s : samples) s = draws.NextIndex(n);
      start = n;
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    forest.trees[t] = GrowTree(features, labels, samples, params, key, start);
  });
  return forest;
}

std::vector<Proba> PredictProba(const Forest& forest, const FeatureMatrix& features) {
  if (features.cols() != forest.n_features) {
    throw InputError("forest expects " + std::to_string(forest.n_features) +
                     " features, got " + std::to_string(features.cols()));
  }
  if (forest.trees.empty()) throw InputError("forest has no trees");
  std::vector<Proba> out(features.rows());
  const double inv = 1.0 / static_cast<double>(forest.trees.size());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    double p0 = 0.0, p1 = 0.0;
    for (const DecisionTree& tree : forest.trees) {
      const TreeNode& leaf = tree.LeafFor(features.row(r));
      p0 += leaf.proba[0];
      p1 += leaf.proba[1];
    }
    out[r] = {p0 * inv, p1 * inv};
  }
  return out;
}

double LogLoss(std::span<const Proba> probs, Labels labels, double clip_epsilon) {
  if (probs.size() != labels.size()) {
    throw InputError("log loss: " + std::to_string(probs.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labels");
  }
  if (probs.empty()) throw InputError("log loss of an empty set");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InputError("labels must be 0 or 1");
    const double p = std::clamp(probs[i][labels[i]], clip_epsilon, 1.0 - clip_epsilon);
    sum -= std::log(p);
  }
  return sum / static_cast<double>(probs.size());
}

std::vector<std::size_t> StratifiedFolds(Labels labels, std::size_t n_folds,
                                         std::uint64_t seed) {
  if (n_folds < 2) throw InputError("n_folds must be >= 2");
  const std::size_t n = labels.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng::CounterStream stream(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[stream.NextIndex(i)]);
  }
  std::vector<std::size_t> fold(n);
  std::size_t seen[2] = {0, 0};
  for (std::size_t idx : perm) {
    const int y = labels[idx];
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
    fold[idx] = seen[y]++ % n_folds;
  }
  return fold;
}

double CrossValidatedLogLoss(const FeatureMatrix& features, Labels labels,
                             const CstParams& params, std::uint64_t repeat_seed) {
  CheckLabels(features, labels);
  const std::size_t per_class[2] = {
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0)),
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1))};
  if (per_class[0] < params.n_folds || per_class[1] < params.n_folds) {
    throw InputError("too few samples per class for " + std::to_string(params.n_folds) +
                     "-fold stratified cross-validation");
  }
  const auto fold = StratifiedFolds(labels, params.n_folds, rng::Derive(repeat_seed, 0));
  double total = 0.0;
  for (std::size_t f = 0; f < params.n_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    std::vector<int> train_labels, test_labels;
    for (std::size_t i : train) train_labels.push_back(labels[i]);
    for (std::size_t i : test) test_labels.push_back(labels[i]);
    const Forest forest = TrainForest(features.SelectRows(train), train_labels, params,
                                      rng::Derive(repeat_seed, 1 + f));
    const auto probs = PredictProba(forest, features.SelectRows(test));
    total += LogLoss(probs, test_labels, params.clip_epsilon);
  }
  return total / static_cast<double>(params.n_folds);
}

CstReport TwoSampleTest(const FeatureMatrix& generated, const FeatureMatrix& real,
                        const CstParams& params) {
  params.Validate();
  if (generated.cols() != real.cols()) {
    throw InputError("two-sample test dimension mismatch: " +
                     std::to_string(generated.cols()) + " vs " + std::to_string(real.cols()));
  }
  if (generated.rows() < params.n_folds || real.rows() < params.n_folds) {
    throw InputError("too few samples per class for " + std::to_string(params.n_folds) +
                     "-fold stratified cross-validation");
  }
  const FeatureMatrix* parts[] = {&generated, &real};
  const FeatureMatrix combined = FeatureMatrix::Concat(parts);
  std::vector<int> labels(combined.rows(), 1);
  std::fill(labels.begin(), labels.begin() + generated.rows(), 0);

  CstReport report;
  report.params_echo = params;
  report.per_repeat.resize(params.n_repeats);
  ParallelFor(params.n_repeats, [&](std::size_t r) {
    report.per_repeat[r] = CrossValidatedLogLoss(combined, labels, params,
                                                 rng::Derive(params.master_seed, r));
  });
  const double n = static_cast<double>(report.per_repeat.size());
  double sum = 0.0;
  for (double v : report.per_repeat) sum += v;
  report.mean_logloss = sum / n;
  double ss = 0.0;
  for (double v : report.per_repeat) ss += (v - report.mean_logloss) * (v - report.mean_logloss);
  report.std_logloss = std::sqrt(ss / n);
  return report;
}

namespace {

nlohmann::ordered_json ParamsJson(const CstParams& p) {
  nlohmann::ordered_json j;
  j["n_trees"] = p.n_trees;
  j["max_depth"] = p.max_depth ? nlohmann::ordered_json(*p.max_depth) : nlohmann::ordered_json();
  j["min_leaf"] = p.min_leaf;
  if (p.features_per_split.rule == FeaturesPerSplit::Rule::kSqrtD) {
    j["features_per_split"] = "sqrt_d";
  } else {
    j["features_per_split"] = {{"fixed", p.features_per_split.k}};
  }
  j["n_repeats"] = p.n_repeats;
  j["n_folds"] = p.n_folds;
  j["clip_epsilon"] = p.clip_epsilon;
  j["master_seed"] = p.master_seed;
  j["bootstrap"] = p.bootstrap;
  return j;
}

}  // namespace

std::string ParamsToJson(const CstParams& params, int indent) {
  return ParamsJson(params).dump(indent);
}

std::string ToJson(const CstReport& report, int indent) {
  nlohmann::ordered_json j;
  j["mean_logloss"] = report.mean_logloss;
  j["std_logloss"] = report.std_logloss;
  j["per_repeat"] = report.per_repeat;
  j["params_echo"] = ParamsJson(report.params_echo);
  return j.dump(indent);
}

}  // namespace transeval::cst

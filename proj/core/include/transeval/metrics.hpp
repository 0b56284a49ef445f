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

#ifndef TRANSEVAL_METRICS_HPP_
#define TRANSEVAL_METRICS_HPP_

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "transeval/features.hpp"
#include "transeval/image.hpp"

namespace transeval {

// Mean and unbiased covariance of a feature set.
struct GaussianSummary {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;

  Eigen::Index dim() const { return mu.size(); }
};

struct FrechetResult {
  double value = 0.0;       // mean_term + trace_term, clamped at 0
  double mean_term = 0.0;   // ||mu_a - mu_b||^2
  double trace_term = 0.0;  // Tr(S_a + S_b - 2 (S_a S_b)^{1/2})
  bool jitter_applied = false;
  double jitter_epsilon = 0.0;
};

struct CrdResult {
  double mean_similarity = 0.0;  // (1/NM) sum_ij g_i . x_j
  double distance = 0.0;         // 1 - mean_similarity
  std::size_t n = 0;             // generated rows
  std::size_t m = 0;             // real rows
};

// Diagonal jitter added to both covariances when the first Frechet attempt
// is numerically unusable.
inline constexpr double kFrechetJitter = 1e-6;

// Column means and (C + C^T)/2 of the N-1 covariance. Requires N >= 2.
GaussianSummary FitGaussian(const FeatureMatrix& features);
GaussianSummary FitGaussian(const Eigen::MatrixXd& samples);

// Principal square root of a symmetric PSD matrix through its
// eigendecomposition; eigenvalues in [-1e-8 * max|eig|, 0) are clamped to 0.
// Throws ComputationError when the matrix is not symmetric or has a more
// negative eigenvalue.
Eigen::MatrixXd SqrtmPsd(const Eigen::MatrixXd& s);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 M), M = sqrtm(S_a^{1/2} S_b S_a^{1/2}).
FrechetResult FrechetDistance(const GaussianSummary& a, const GaussianSummary& b);

// Mean pairwise dot product between generated rows and real rows, computed
// as the dot product of the two row means. With `normalize` the rows are
// first scaled to unit length, which makes the quantity a mean cosine
// similarity.
CrdResult Crd(const FeatureMatrix& generated, const FeatureMatrix& real,
              bool normalize = true);

// Mean over pairs of the mean absolute per-sample difference.
double RoundTripL1(std::span<const ImageTile> originals,
                   std::span<const ImageTile> reconstructions);

}  // namespace transeval

#endif  // TRANSEVAL_METRICS_HPP_

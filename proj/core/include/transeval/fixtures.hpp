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

#ifndef TRANSEVAL_FIXTURES_HPP_
#define TRANSEVAL_FIXTURES_HPP_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "transeval/features.hpp"
#include "transeval/image.hpp"

namespace transeval::fixtures {

struct GaussianSpec {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma_diag;  // variances
  std::size_t n = 0;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Row i, column d: mu_d + sqrt(var_d) * ToNormal(At(Derive(seed, i), d)).
FeatureMatrix GenGaussianFeatures(const GaussianSpec& spec);

struct ConvergenceFixture {
  FeatureMatrix real;
  std::vector<std::pair<std::int64_t, FeatureMatrix>> epochs;  // t = 1..n_epochs
  std::vector<double> alpha;                                   // alpha[t-1] = t / n_epochs
  Eigen::VectorXd mu_real;
  Eigen::VectorXd mu_far;
};

inline constexpr double kConvergenceRealMean = 5.0;
inline constexpr double kConvergenceDisplacement = 8.0;

// Unit variances. mu_real = 5 in every coordinate; mu_far = mu_real + 8 u
// with u_d = (+-1 alternating) / sqrt(D). Epoch t samples around
// (1 - a_t) mu_far + a_t mu_real. The real set uses Derive(seed, 0), epoch t
// uses Derive(seed, t).
ConvergenceFixture GenConvergenceFixture(std::size_t dim, std::size_t n_per_epoch,
                                         std::size_t n_epochs, std::uint64_t seed);

// Random tile whose samples are multiples of 1/256 in [0, max_value], so
// that adding a dyadic offset stays exact in float.
ImageTile GenBaseTile(int height, int width, std::uint64_t seed, double max_value = 1.0);

// Adds `amplitude` to all bands of every pixel whose row or column index is
// a multiple of `period`, then clamps to [0, 1].
ImageTile GenGridImage(const ImageTile& base, int period, double amplitude);

// Pixels touched by GenGridImage, row-major.
std::vector<bool> GridLattice(int height, int width, int period);

struct ShiftFixture {
  ImageTile base;
  ImageTile shifted;  // base + shift on `band`
  int band = 0;
  double shift = 0.0;
};

// Base tile limited to [0, 1 - shift] so the shifted band never clamps.
ShiftFixture GenShiftFixture(int height, int width, int band, double shift,
                             std::uint64_t seed);

// Mean pairwise cosine similarity by explicit double loop.
double OracleCrdBruteforce(const FeatureMatrix& generated, const FeatureMatrix& real);

// Closed-form Frechet distance between diagonal Gaussians:
// sum_d (mu_a - mu_b)^2 + v_a + v_b - 2 sqrt(v_a v_b).
double OracleFrechetDiag(const Eigen::VectorXd& mu_a, const Eigen::VectorXd& var_a,
                         const Eigen::VectorXd& mu_b, const Eigen::VectorXd& var_b);

}  // namespace transeval::fixtures

#endif  // TRANSEVAL_FIXTURES_HPP_

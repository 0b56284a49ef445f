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

#include "transeval/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "transeval/error.hpp"
#include "transeval/rng.hpp"

namespace transeval::fixtures {

void GaussianSpec::Validate() const {
  if (mu.size() == 0) throw InputError("gaussian spec: empty mean");
  if (sigma_diag.size() != mu.size()) {
    throw InputError("gaussian spec: variance length does not match mean length");
  }
  if (!(sigma_diag.array() > 0.0).all()) throw InputError("gaussian spec: variances must be > 0");
  if (!mu.allFinite() || !sigma_diag.allFinite()) {
    throw InputError("gaussian spec: non-finite parameters");
  }
  if (n < 2) throw InputError("gaussian spec: n must be >= 2");
}

FeatureMatrix GenGaussianFeatures(const GaussianSpec& spec) {
  spec.Validate();
  const auto d = static_cast<std::size_t>(spec.mu.size());
  std::vector<float> data(spec.n * d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    rng::CounterStream stream(rng::Derive(spec.seed, i));
    for (std::size_t c = 0; c < d; ++c) {
      const auto e = static_cast<Eigen::Index>(c);
      data[i * d + c] = static_cast<float>(spec.mu(e) + std::sqrt(spec.sigma_diag(e)) *
                                                            stream.NextNormal());
    }
  }
  return FeatureMatrix(spec.n, d, std::move(data));
}

ConvergenceFixture GenConvergenceFixture(std::size_t dim, std::size_t n_per_epoch,
                                         std::size_t n_epochs, std::uint64_t seed) {
  if (n_epochs < 3) throw InputError("convergence fixture needs at least 3 epochs");
  if (dim < 1) throw InputError("convergence fixture needs dim >= 1");
  const auto d = static_cast<Eigen::Index>(dim);
  ConvergenceFixture fx;
  fx.mu_real = Eigen::VectorXd::Constant(d, kConvergenceRealMean);
  Eigen::VectorXd u(d);
  for (Eigen::Index i = 0; i < d; ++i) u(i) = (i % 2 == 0 ? 1.0 : -1.0);
  u /= std::sqrt(static_cast<double>(dim));
  fx.mu_far = fx.mu_real + kConvergenceDisplacement * u;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);

  fx.real = GenGaussianFeatures({fx.mu_real, ones, n_per_epoch, rng::Derive(seed, 0)});
  for (std::size_t t = 1; t <= n_epochs; ++t) {
    const double a = static_cast<double>(t) / static_cast<double>(n_epochs);
    fx.alpha.push_back(a);
    const Eigen::VectorXd mu = (1.0 - a) * fx.mu_far + a * fx.mu_real;
    fx.epochs.emplace_back(static_cast<std::int64_t>(t),
                           GenGaussianFeatures({mu, ones, n_per_epoch, rng::Derive(seed, t)}));
  }
  return fx;
}

ImageTile GenBaseTile(int height, int width, std::uint64_t seed, double max_value) {
  if (height < 1 || width < 1) throw InputError("tile dimensions must be positive");
  if (!(max_value >= 0.0 && max_value <= 1.0)) throw InputError("max_value must lie in [0, 1]");
  const auto levels = static_cast<std::uint64_t>(std::floor(max_value * 256.0)) + 1;
  std::vector<float> data(static_cast<std::size_t>(height) * width * ImageTile::kBands);
  rng::CounterStream stream(seed);
  for (float& v : data) v = static_cast<float>(stream.NextIndex(levels)) / 256.0f;
  return ImageTile(height, width, std::move(data));
}

ImageTile GenGridImage(const ImageTile& base, int period, double amplitude) {
  if (period < 2) throw InputError("grid period must be >= 2");
  ImageTile out = base;
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      if (y % period != 0 && x % period != 0) continue;
      for (int b = 0; b < ImageTile::kBands; ++b) {
        const double v = static_cast<double>(base.at(y, x, b)) + amplitude;
        out.at(y, x, b) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

std::vector<bool> GridLattice(int height, int width, int period) {
  if (period < 2) throw InputError("grid period must be >= 2");
  std::vector<bool> mask(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      mask[static_cast<std::size_t>(y) * width + x] = y % period == 0 || x % period == 0;
    }
  }
  return mask;
}

ShiftFixture GenShiftFixture(int height, int width, int band, double shift,
                             std::uint64_t seed) {
  if (band < 0 || band >= ImageTile::kBands) throw InputError("band must be 0, 1 or 2");
  if (!(shift >= 0.0 && shift <= 1.0)) throw InputError("shift must lie in [0, 1]");
  ShiftFixture fx;
  fx.band = band;
  fx.shift = shift;
  fx.base = GenBaseTile(height, width, seed, 1.0 - shift);
  fx.shifted = fx.base;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      fx.shifted.at(y, x, band) =
          static_cast<float>(static_cast<double>(fx.base.at(y, x, band)) + shift);
    }
  }
  return fx;
}

double OracleCrdBruteforce(const FeatureMatrix& generated, const FeatureMatrix& real) {
  if (generated.cols() != real.cols()) throw InputError("CRD oracle: dimension mismatch");
  auto norm = [](std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < generated.rows(); ++i) {
    const auto g = generated.row(i);
    const double ng = norm(g);
    for (std::size_t j = 0; j < real.rows(); ++j) {
      const auto x = real.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < g.size(); ++c) dot += static_cast<double>(g[c]) * x[c];
      total += dot / (ng * norm(x));
    }
  }
  return total / static_cast<double>(generated.rows() * real.rows());
}

double OracleFrechetDiag(const Eigen::VectorXd& mu_a, const Eigen::VectorXd& var_a,
                         const Eigen::VectorXd& mu_b, const Eigen::VectorXd& var_b) {
  const Eigen::Index d = mu_a.size();
  if (var_a.size() != d || mu_b.size() != d || var_b.size() != d) {
    throw InputError("Frechet oracle: dimension mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double dm = mu_a(i) - mu_b(i);
    total += dm * dm + var_a(i) + var_b(i) - 2.0 * std::sqrt(var_a(i) * var_b(i));
  }
  return total;
}

}  // namespace transeval::fixtures

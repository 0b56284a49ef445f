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

#include "transeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "transeval/error.hpp"

namespace transeval {
namespace {

bool AllFinite(const Eigen::MatrixXd& m) { return m.allFinite(); }

struct TraceAttempt {
  bool ok = false;
  double trace_term = 0.0;
};

TraceAttempt TryTraceTerm(const Eigen::MatrixXd& sa, const Eigen::MatrixXd& sb) {
  TraceAttempt out;
  try {
    const Eigen::MatrixXd root_a = SqrtmPsd(sa);
    Eigen::MatrixXd inner = root_a * sb * root_a;
    inner = 0.5 * (inner + inner.transpose()).eval();
    if (!AllFinite(inner)) return out;
    const Eigen::MatrixXd m = SqrtmPsd(inner);
    out.trace_term = sa.trace() + sb.trace() - 2.0 * m.trace();
    out.ok = std::isfinite(out.trace_term);
  } catch (const ComputationError&) {
    out.ok = false;
  }
  return out;
}

std::vector<double> RowMean(const FeatureMatrix& f, bool normalize, const char* which) {
  const std::size_t d = f.cols();
  std::vector<double> mean(d, 0.0);
  std::vector<double> row(d);
  for (std::size_t r = 0; r < f.rows(); ++r) {
    const auto src = f.row(r);
    double scale = 1.0;
    if (normalize) {
      double norm2 = 0.0;
      for (float v : src) norm2 += static_cast<double>(v) * v;
      if (norm2 == 0.0) {
        throw InputError(std::string("zero row ") + std::to_string(r) + " in " + which +
                         " features cannot be normalized");
      }
      scale = 1.0 / std::sqrt(norm2);
    }
    for (std::size_t c = 0; c < d; ++c) mean[c] += src[c] * scale;
  }
  for (double& v : mean) v /= static_cast<double>(f.rows());
  return mean;
}

}  // namespace

GaussianSummary FitGaussian(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 2) {
    throw InputError("fitting a Gaussian needs at least 2 samples, got " +
                     std::to_string(samples.rows()));
  }
  GaussianSummary g;
  g.mu = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - g.mu.transpose();
  const Eigen::MatrixXd c =
      (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
  g.sigma = 0.5 * (c + c.transpose());
  return g;
}

GaussianSummary FitGaussian(const FeatureMatrix& features) {
  return FitGaussian(features.ToEigen());
}

Eigen::MatrixXd SqrtmPsd(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) throw ComputationError("sqrtm_psd needs a square matrix");
  if (s.size() == 0) return s;
  if (!AllFinite(s)) throw ComputationError("sqrtm_psd input is not finite");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw ComputationError("sqrtm_psd input is not symmetric (max |S - S^T| = " +
                           std::to_string(asym) + ")");
  }
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw ComputationError("symmetric eigendecomposition did not converge");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  const double max_abs = lambda.cwiseAbs().maxCoeff();
  const double floor = -1e-8 * max_abs;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < floor) {
      throw ComputationError("sqrtm_psd input has eigenvalue " + std::to_string(lambda(i)) +
                             " below tolerance " + std::to_string(floor));
    }
    lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  Eigen::MatrixXd root = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (root + root.transpose());
}

FrechetResult FrechetDistance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.dim() != b.dim() || a.sigma.rows() != a.dim() || b.sigma.rows() != b.dim()) {
    throw InputError("Frechet distance dimension mismatch: " + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()));
  }
  FrechetResult r;
  r.mean_term = (a.mu - b.mu).squaredNorm();

  TraceAttempt attempt = TryTraceTerm(a.sigma, b.sigma);
  if (!attempt.ok) {
    const Eigen::MatrixXd jitter =
        kFrechetJitter * Eigen::MatrixXd::Identity(a.dim(), a.dim());
    attempt = TryTraceTerm(a.sigma + jitter, b.sigma + jitter);
    r.jitter_applied = true;
    r.jitter_epsilon = kFrechetJitter;
    if (!attempt.ok) {
      throw ComputationError("Frechet distance is not finite even after diagonal jitter");
    }
  }
  r.trace_term = attempt.trace_term;
  r.value = r.mean_term + r.trace_term;
  if (!std::isfinite(r.value)) throw ComputationError("Frechet distance is not finite");
  // Rounding can push an exact zero slightly negative.
  const double tolerance =
      1e-9 * std::max({1.0, a.sigma.trace() + b.sigma.trace(), r.mean_term});
  if (r.value < 0.0) {
    if (r.value < -tolerance) {
      throw ComputationError("Frechet distance came out negative: " + std::to_string(r.value));
    }
    r.value = 0.0;
  }
  return r;
}

CrdResult Crd(const FeatureMatrix& generated, const FeatureMatrix& real, bool normalize) {
  if (generated.cols() != real.cols()) {
    throw InputError("CRD dimension mismatch: " + std::to_string(generated.cols()) + " vs " +
                     std::to_string(real.cols()));
  }
  const std::vector<double> g = RowMean(generated, normalize, "generated");
  const std::vector<double> x = RowMean(real, normalize, "real");
  double dot = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) dot += g[k] * x[k];
  if (normalize) dot = std::clamp(dot, -1.0, 1.0);
  CrdResult r;
  r.mean_similarity = dot;
  r.distance = 1.0 - dot;
  r.n = generated.rows();
  r.m = real.rows();
  return r;
}

double RoundTripL1(std::span<const ImageTile> originals,
                   std::span<const ImageTile> reconstructions) {
  if (originals.size() != reconstructions.size()) {
    throw InputError("round-trip L1 needs equal counts, got " +
                     std::to_string(originals.size()) + " and " +
                     std::to_string(reconstructions.size()));
  }
  if (originals.empty()) throw InputError("round-trip L1 needs at least one pair");
  double total = 0.0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const ImageTile& a = originals[i];
    const ImageTile& b = reconstructions[i];
    if (!a.SameShape(b)) {
      throw InputError("round-trip pair " + std::to_string(i) + " has mismatched shapes");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      sum += std::abs(static_cast<double>(a.data()[k]) - b.data()[k]);
    }
    total += sum / static_cast<double>(a.size());
  }
  return total / static_cast<double>(originals.size());
}

}  // namespace transeval

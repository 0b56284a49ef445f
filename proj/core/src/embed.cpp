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

#include "transeval/embed.hpp"

#include <cmath>
#include <sstream>

#include "transeval/error.hpp"
#include "transeval/onnx.hpp"
#include "transeval/parallel.hpp"
#include "transeval/rng.hpp"

namespace transeval {
namespace {

class ProjectionEmbedder final : public Embedder {
 public:
  ProjectionEmbedder(std::uint64_t seed, std::size_t dim, bool normalize)
      : seed_(seed), dim_(dim), normalize_(normalize) {}

  FeatureMatrix Embed(std::span<const ImageTile> tiles) const override {
    if (tiles.empty()) throw InputError("cannot embed an empty batch");
    const std::size_t p = tiles.front().size();
    for (const ImageTile& t : tiles) {
      if (!t.SameShape(tiles.front())) {
        throw InputError("all tiles in a batch must share one shape");
      }
    }
    const std::size_t n = tiles.size();
    std::vector<float> data(n * dim_);
    // One projection row at a time so the D x P matrix is never materialized.
    ParallelFor(dim_, [&](std::size_t row) {
      std::vector<double> weights(p);
      for (std::size_t col = 0; col < p; ++col) {
        weights[col] = ProjectionEntry(seed_, row, col, p);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto pixels = tiles[i].data();
        double acc = 0.0;
        for (std::size_t col = 0; col < p; ++col) acc += weights[col] * pixels[col];
        data[i * dim_ + row] = static_cast<float>(std::abs(acc));
      }
    });
    FeatureMatrix out(n, dim_, std::move(data));
    return normalize_ ? NormalizeRows(out) : out;
  }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  bool normalize_;
};

class ModelEmbedder final : public Embedder {
 public:
  ModelEmbedder(onnx::Model model, std::size_t dim, bool normalize)
      : model_(std::move(model)), dim_(dim), normalize_(normalize) {}

  FeatureMatrix Embed(std::span<const ImageTile> tiles) const override {
    if (tiles.empty()) throw InputError("cannot embed an empty batch");
    std::vector<std::vector<float>> rows(tiles.size());
    ParallelFor(tiles.size(), [&](std::size_t i) { rows[i] = EmbedOne(tiles[i]); });

    const std::size_t d = rows.front().size();
    std::vector<float> data;
    data.reserve(tiles.size() * d);
    for (const auto& r : rows) {
      if (r.size() != d) throw ComputationError("model output width changed between images");
      data.insert(data.end(), r.begin(), r.end());
    }
    FeatureMatrix out(tiles.size(), d, std::move(data));
    return normalize_ ? NormalizeRows(out) : out;
  }

 private:
  // NCHW batch of one; the model must emit [1, D] (trailing 1s tolerated).
  std::vector<float> EmbedOne(const ImageTile& tile) const {
    const std::int64_t h = tile.height(), w = tile.width();
    std::vector<float> chw(static_cast<std::size_t>(3 * h * w));
    for (std::int64_t y = 0; y < h; ++y) {
      for (std::int64_t x = 0; x < w; ++x) {
        for (int b = 0; b < 3; ++b) {
          chw[(b * h + y) * w + x] = tile.at(static_cast<int>(y), static_cast<int>(x), b);
        }
      }
    }
    const onnx::Tensor out =
        model_.Run(onnx::Tensor::Float({1, 3, h, w}, std::move(chw)));
    if (out.type != onnx::DataType::kFloat || out.rank() < 2 || out.shape[0] != 1) {
      throw InputError("model output must be a float [N, D] tensor");
    }
    for (std::size_t k = 2; k < out.rank(); ++k) {
      if (out.shape[k] != 1) {
        throw InputError("model output must be [N, D]; got extra non-unit dimensions");
      }
    }
    const auto d = static_cast<std::size_t>(out.shape[1]);
    if (dim_ != 0 && d != dim_) {
      throw InputError("model output width " + std::to_string(d) +
                       " does not match expected dimension " + std::to_string(dim_));
    }
    for (float v : out.f) {
      if (!std::isfinite(v)) throw ComputationError("model produced a non-finite feature");
    }
    return out.f;
  }

  onnx::Model model_;
  std::size_t dim_;
  bool normalize_;
};

}  // namespace

void EmbedderSpec::Validate() const {
  switch (kind) {
    case EmbedderKind::kExternalModel:
      if (model_path.empty()) throw InputError("external_model embedder requires model_path");
      break;
    case EmbedderKind::kSeededProjection:
      if (output_dim == 0) throw InputError("seeded_projection embedder requires output_dim >= 1");
      break;
  }
}

std::string EmbedderSpec::Describe() const {
  std::ostringstream os;
  if (kind == EmbedderKind::kExternalModel) {
    os << "external_model path=" << model_path.string() << " dim=" << output_dim;
  } else {
    os << "seeded_projection seed=" << seed << " dim=" << output_dim;
  }
  os << " normalize_rows=" << (normalize_rows ? 1 : 0);
  return os.str();
}

std::unique_ptr<Embedder> MakeEmbedder(const EmbedderSpec& spec) {
  spec.Validate();
  if (spec.kind == EmbedderKind::kExternalModel) {
    return std::make_unique<ModelEmbedder>(onnx::Model::Load(spec.model_path),
                                           spec.output_dim, spec.normalize_rows);
  }
  return std::make_unique<ProjectionEmbedder>(spec.seed, spec.output_dim,
                                              spec.normalize_rows);
}

FeatureMatrix EmbedBatch(std::span<const ImageTile> tiles, const EmbedderSpec& spec) {
  return MakeEmbedder(spec)->Embed(tiles);
}

double ProjectionEntry(std::uint64_t seed, std::size_t row, std::size_t col,
                       std::size_t input_len) {
  return rng::ToNormal(rng::At(rng::Derive(seed, row), col)) /
         std::sqrt(static_cast<double>(input_len));
}

std::vector<double> SeededProjectionEmbed(const ImageTile& tile, std::uint64_t seed,
                                          std::size_t dim) {
  const std::size_t p = tile.size();
  const auto pixels = tile.data();
  std::vector<double> out(dim);
  for (std::size_t row = 0; row < dim; ++row) {
    double acc = 0.0;
    for (std::size_t col = 0; col < p; ++col) {
      acc += ProjectionEntry(seed, row, col, p) * pixels[col];
    }
    out[row] = std::abs(acc);
  }
  return out;
}

FeatureMatrix NormalizeRows(const FeatureMatrix& features) {
  const std::size_t d = features.cols();
  std::vector<float> data(features.data().begin(), features.data().end());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) norm2 += static_cast<double>(data[r * d + c]) * data[r * d + c];
    if (norm2 == 0.0) {
      throw ComputationError("zero-norm feature row " + std::to_string(r) +
                             " cannot be normalized");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t c = 0; c < d; ++c) {
      data[r * d + c] = static_cast<float>(data[r * d + c] * inv);
    }
  }
  return FeatureMatrix(features.rows(), d, std::move(data), features.labels());
}

}  // namespace transeval

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

#ifndef TRANSEVAL_EMBED_HPP_
#define TRANSEVAL_EMBED_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "transeval/features.hpp"
#include "transeval/image.hpp"

namespace transeval {

enum class EmbedderKind { kExternalModel, kSeededProjection };

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::kSeededProjection;
  std::filesystem::path model_path;  // kExternalModel
  // Embedding width. For external models 0 accepts whatever the model emits.
  std::size_t output_dim = 0;
  std::uint64_t seed = 0;  // kSeededProjection
  bool normalize_rows = false;

  void Validate() const;
  // Stable one-line description, recorded next to feature caches.
  std::string Describe() const;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  // Row i embeds tiles[i]. Tiles may be processed concurrently; row order
  // never depends on scheduling.
  virtual FeatureMatrix Embed(std::span<const ImageTile> tiles) const = 0;
};

// Loads the model once (kExternalModel). Throws InputError when the model
// cannot be loaded.
std::unique_ptr<Embedder> MakeEmbedder(const EmbedderSpec& spec);

FeatureMatrix EmbedBatch(std::span<const ImageTile> tiles, const EmbedderSpec& spec);

// Entry (row, col) of the D x P projection used by the seeded-projection
// embedder, P = H*W*3:
//   ToNormal(At(Derive(seed, row), col)) / sqrt(P)
double ProjectionEntry(std::uint64_t seed, std::size_t row, std::size_t col,
                       std::size_t input_len);

// |R * flatten(tile)| elementwise, R as in ProjectionEntry.
std::vector<double> SeededProjectionEmbed(const ImageTile& tile, std::uint64_t seed,
                                          std::size_t dim);

// Scales every row to unit L2 norm. Throws ComputationError on a zero row.
FeatureMatrix NormalizeRows(const FeatureMatrix& features);

}  // namespace transeval

#endif  // TRANSEVAL_EMBED_HPP_

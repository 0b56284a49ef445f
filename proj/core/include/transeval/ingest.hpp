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

#ifndef TRANSEVAL_INGEST_HPP_
#define TRANSEVAL_INGEST_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "transeval/image.hpp"

namespace transeval {

enum class ResizeFilter { kBilinear };

// Resize + per-channel standardization applied before embedding.
struct PreprocessSpec {
  int target_height = 224;
  int target_width = 224;
  std::array<double, 3> channel_mean{0.485, 0.456, 0.406};
  std::array<double, 3> channel_std{0.229, 0.224, 0.225};
  ResizeFilter resize_filter = ResizeFilter::kBilinear;

  // The normalization torchvision's ImageNet-pretrained ResNet and
  // Inception weights were trained with; also the default-constructed value.
  static PreprocessSpec ImageNet() { return {}; }

  void Validate() const;
  friend bool operator==(const PreprocessSpec&, const PreprocessSpec&) = default;
};

struct EpochDir {
  std::int64_t epoch = 0;
  std::filesystem::path dir;
};

struct PairDirs {
  std::filesystem::path original;
  std::filesystem::path transformed;
  std::filesystem::path reconstructed;
};

struct DatasetManifest {
  std::filesystem::path real_dir;
  std::vector<EpochDir> epochs;  // strictly increasing epoch index
  std::optional<PairDirs> pairs;
  PreprocessSpec preprocess;
};

// Parses and validates a manifest. Relative paths are resolved against
// `base_dir`. Directory existence is checked.
DatasetManifest ParseManifest(std::string_view json,
                              const std::filesystem::path& base_dir);
DatasetManifest LoadManifest(const std::filesystem::path& path);

// Bilinear resize to the target size (half-pixel centers, edge clamp),
// followed by (v - mean_c) / std_c per channel.
ImageTile Preprocess(const ImageTile& tile, const PreprocessSpec& spec);

// Bilinear resize only.
ImageTile ResizeBilinear(const ImageTile& tile, int height, int width);

// Image files (.png, .tif, .tiff) in `dir`, sorted by file name bytes.
std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir);

struct EpochImages {
  std::int64_t epoch = 0;
  std::vector<std::filesystem::path> images;
};

// One record per manifest epoch. Throws InputError naming the epoch when a
// directory holds no images.
std::vector<EpochImages> ScanEpochs(const DatasetManifest& manifest);

}  // namespace transeval

#endif  // TRANSEVAL_INGEST_HPP_

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

#include "transeval/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "transeval/error.hpp"

namespace transeval {

ImageTile::ImageTile(int height, int width)
    : ImageTile(height, width,
                std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                   std::max(width, 0) * kBands)) {}

ImageTile::ImageTile(int height, int width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height <= 0 || width <= 0) {
    throw InputError("image dimensions must be positive, got " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  const std::size_t expected =
      static_cast<std::size_t>(height) * width * kBands;
  if (data_.size() != expected) {
    throw InputError("image data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(height) + "x" +
                     std::to_string(width) + "x3");
  }
}

bool ImageTile::InUnitRange() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return v >= 0.0f && v <= 1.0f; });
}

Raster ReadRaster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G',
                                              '\r', '\n', 0x1A, '\n'};
  try {
    if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
      return DecodePng(bytes);
    }
    if (bytes.size() >= 4 &&
        ((bytes[0] == 'I' && bytes[1] == 'I' && bytes[2] == 42 && bytes[3] == 0) ||
         (bytes[0] == 'M' && bytes[1] == 'M' && bytes[2] == 0 && bytes[3] == 42))) {
      return DecodeTiff(bytes);
    }
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  throw InputError(path.string() + ": unsupported format (expected PNG or TIFF)");
}

ImageTile LoadImage(const std::filesystem::path& path) {
  const Raster raster = ReadRaster(path);
  if (raster.channels != ImageTile::kBands) {
    throw InputError(path.string() + ": expected 3 bands, found " +
                     std::to_string(raster.channels));
  }
  const float scale = static_cast<float>(raster.max_value());
  std::vector<float> data(raster.samples.size());
  std::transform(raster.samples.begin(), raster.samples.end(), data.begin(),
                 [scale](std::uint16_t v) { return static_cast<float>(v) / scale; });
  return ImageTile(raster.height, raster.width, std::move(data));
}

void SavePng(const ImageTile& tile, const std::filesystem::path& path,
             int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InputError("PNG bit depth must be 8 or 16");
  }
  Raster raster;
  raster.height = tile.height();
  raster.width = tile.width();
  raster.channels = ImageTile::kBands;
  raster.bit_depth = bit_depth;
  const double max_value = raster.max_value();
  raster.samples.resize(tile.size());
  std::transform(tile.data().begin(), tile.data().end(), raster.samples.begin(),
                 [max_value](float v) {
                   const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
                   return static_cast<std::uint16_t>(std::lround(c * max_value));
                 });
  WritePng(raster, path);
}

}  // namespace transeval

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

#ifndef TRANSEVAL_IMAGE_HPP_
#define TRANSEVAL_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace transeval {

// H x W x 3 raster, row-major with interleaved R, G, B samples. Tiles that
// come out of LoadImage hold values in [0, 1]; standardized tiles produced by
// Preprocess do not.
class ImageTile {
 public:
  static constexpr int kBands = 3;

  ImageTile() = default;
  ImageTile(int height, int width);  // zero-filled
  ImageTile(int height, int width, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  float at(int y, int x, int band) const { return data_[Index(y, x, band)]; }
  float& at(int y, int x, int band) { return data_[Index(y, x, band)]; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool InUnitRange() const;
  bool SameShape(const ImageTile& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const ImageTile&, const ImageTile&) = default;

 private:
  std::size_t Index(int y, int x, int band) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kBands + band;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Integer samples as stored in the file, before scaling.
struct Raster {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint16_t> samples;  // height * width * channels

  std::uint32_t max_value() const { return bit_depth == 16 ? 65535u : 255u; }
};

// Decodes PNG (8/16-bit) or TIFF (strip-based, uncompressed or deflate),
// chosen by file signature. Throws InputError on unsupported or corrupt data.
Raster ReadRaster(const std::filesystem::path& path);
Raster DecodePng(std::span<const std::uint8_t> bytes);
Raster DecodeTiff(std::span<const std::uint8_t> bytes);

// Loads a 3-band raster and scales samples by 1/255 or 1/65535.
ImageTile LoadImage(const std::filesystem::path& path);

// Writes an RGB PNG at 8 or 16 bits; values are clamped to [0, 1] and
// rounded to the nearest integer level.
void SavePng(const ImageTile& tile, const std::filesystem::path& path,
             int bit_depth = 8);

// Writes a raster (1 or 3 channels, 8 or 16 bits) as PNG.
void WritePng(const Raster& raster, const std::filesystem::path& path);

}  // namespace transeval

#endif  // TRANSEVAL_IMAGE_HPP_

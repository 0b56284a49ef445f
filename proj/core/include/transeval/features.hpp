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

#ifndef TRANSEVAL_FEATURES_HPP_
#define TRANSEVAL_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace transeval {

// N x D embedded samples, one row per image, stored as 32-bit floats.
// Metric code promotes to double through ToEigen().
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  // Throws InputError unless rows, cols >= 1, data.size() == rows * cols,
  // every value is finite and labels is empty or has one entry per row.
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data,
                std::vector<std::string> labels = {});

  static FeatureMatrix FromEigen(const Eigen::MatrixXd& m,
                                 std::vector<std::string> labels = {});
  // Row-wise concatenation; all parts must share the column count.
  static FeatureMatrix Concat(std::span<const FeatureMatrix* const> parts);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  float at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data_).subspan(r * cols_, cols_);
  }
  std::span<const float> data() const { return data_; }

  const std::vector<std::string>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  // Selected rows in the given order; labels follow.
  FeatureMatrix SelectRows(std::span<const std::size_t> indices) const;

  Eigen::MatrixXd ToEigen() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
  std::vector<std::string> labels_;
};

// FEAT1 cache layout (all integers little-endian):
//   "FEAT1" | u32 n | u32 d | n*d float32 row-major
//   optional label block: u32 count (== n), then per label u32 byte length
//   followed by UTF-8 bytes.
// Written to a temporary sibling and renamed into place.
void SaveFeatures(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix LoadFeatures(const std::filesystem::path& path);

std::vector<std::uint8_t> EncodeFeatures(const FeatureMatrix& features);
FeatureMatrix DecodeFeatures(std::span<const std::uint8_t> bytes);

}  // namespace transeval

#endif  // TRANSEVAL_FEATURES_HPP_

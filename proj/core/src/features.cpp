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

#include "transeval/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "transeval/error.hpp"

namespace transeval {
namespace {

constexpr char kMagic[5] = {'F', 'E', 'A', 'T', '1'};
constexpr std::size_t kHeaderSize = 5 + 4 + 4;

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(std::span<const std::uint8_t> in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[off + i];
  return v;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols,
                             std::vector<float> data,
                             std::vector<std::string> labels)
    : rows_(rows), cols_(cols), data_(std::move(data)), labels_(std::move(labels)) {
  if (rows_ == 0 || cols_ == 0) {
    throw InputError("feature matrix must have at least one row and column");
  }
  if (cols_ > std::numeric_limits<std::size_t>::max() / rows_ ||
      data_.size() != rows_ * cols_) {
    throw InputError("feature data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw InputError("non-finite feature value at row " +
                       std::to_string(i / cols_) + ", column " +
                       std::to_string(i % cols_));
    }
  }
  if (!labels_.empty() && labels_.size() != rows_) {
    throw InputError("feature label count " + std::to_string(labels_.size()) +
                     " does not match row count " + std::to_string(rows_));
  }
}

FeatureMatrix FeatureMatrix::FromEigen(const Eigen::MatrixXd& m,
                                       std::vector<std::string> labels) {
  std::vector<float> data(static_cast<std::size_t>(m.rows()) * m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data[r * m.cols() + c] = static_cast<float>(m(r, c));
    }
  }
  return FeatureMatrix(m.rows(), m.cols(), std::move(data), std::move(labels));
}

FeatureMatrix FeatureMatrix::Concat(std::span<const FeatureMatrix* const> parts) {
  if (parts.empty()) throw InputError("cannot concatenate zero feature matrices");
  const std::size_t cols = parts.front()->cols();
  std::size_t rows = 0;
  bool all_labeled = true;
  for (const FeatureMatrix* p : parts) {
    if (p->cols() != cols) {
      throw InputError("feature dimension mismatch: " + std::to_string(cols) +
                       " vs " + std::to_string(p->cols()));
    }
    rows += p->rows();
    all_labeled = all_labeled && p->has_labels();
  }
  std::vector<float> data;
  data.reserve(rows * cols);
  std::vector<std::string> labels;
  for (const FeatureMatrix* p : parts) {
    data.insert(data.end(), p->data_.begin(), p->data_.end());
    if (all_labeled) labels.insert(labels.end(), p->labels_.begin(), p->labels_.end());
  }
  return FeatureMatrix(rows, cols, std::move(data), std::move(labels));
}

FeatureMatrix FeatureMatrix::SelectRows(std::span<const std::size_t> indices) const {
  std::vector<float> data;
  data.reserve(indices.size() * cols_);
  std::vector<std::string> labels;
  for (std::size_t i : indices) {
    if (i >= rows_) throw InputError("row index out of range");
    auto r = row(i);
    data.insert(data.end(), r.begin(), r.end());
    if (has_labels()) labels.push_back(labels_[i]);
  }
  return FeatureMatrix(indices.size(), cols_, std::move(data), std::move(labels));
}

Eigen::MatrixXd FeatureMatrix::ToEigen() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) m(r, c) = data_[r * cols_ + c];
  }
  return m;
}

std::vector<std::uint8_t> EncodeFeatures(const FeatureMatrix& f) {
  if (f.rows() > std::numeric_limits<std::uint32_t>::max() ||
      f.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("feature matrix too large for FEAT1");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * f.data().size());
  out.insert(out.end(), kMagic, kMagic + 5);
  PutU32(out, static_cast<std::uint32_t>(f.rows()));
  PutU32(out, static_cast<std::uint32_t>(f.cols()));
  for (float v : f.data()) PutU32(out, std::bit_cast<std::uint32_t>(v));
  if (f.has_labels()) {
    PutU32(out, static_cast<std::uint32_t>(f.labels().size()));
    for (const std::string& label : f.labels()) {
      PutU32(out, static_cast<std::uint32_t>(label.size()));
      out.insert(out.end(), label.begin(), label.end());
    }
  }
  return out;
}

FeatureMatrix DecodeFeatures(std::span<const std::uint8_t> in) {
  if (in.size() < 5) throw InputError("FEAT1: file too short for magic");
  if (std::memcmp(in.data(), kMagic, 4) != 0) {
    throw InputError("FEAT1: bad magic");
  }
  if (in[4] != kMagic[4]) {
    throw InputError(std::string("FEAT1: unsupported version 'FEAT") +
                     static_cast<char>(in[4]) + "' (expected FEAT1)");
  }
  if (in.size() < kHeaderSize) throw InputError("FEAT1: truncated header");
  const std::uint64_t n = GetU32(in, 5);
  const std::uint64_t d = GetU32(in, 9);
  // n, d < 2^32 so n * d * 4 < 2^66 could overflow; guard before multiplying.
  if (d != 0 && n > (std::numeric_limits<std::uint64_t>::max() / 4) / d) {
    throw InputError("FEAT1: n*d overflows");
  }
  const std::uint64_t payload = n * d * 4;
  const std::uint64_t available = in.size() - kHeaderSize;
  if (available < payload) {
    throw InputError("FEAT1: truncated payload, expected " + std::to_string(payload) +
                     " bytes, found " + std::to_string(available));
  }
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(GetU32(in, kHeaderSize + 4 * i));
  }

  std::vector<std::string> labels;
  std::size_t off = kHeaderSize + payload;
  if (off < in.size()) {
    if (in.size() - off < 4) throw InputError("FEAT1: truncated label block");
    const std::uint32_t count = GetU32(in, off);
    off += 4;
    if (count != n) {
      throw InputError("FEAT1: label count " + std::to_string(count) +
                       " does not match n=" + std::to_string(n));
    }
    labels.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      if (in.size() - off < 4) throw InputError("FEAT1: truncated label block");
      const std::uint32_t len = GetU32(in, off);
      off += 4;
      if (in.size() - off < len) throw InputError("FEAT1: truncated label block");
      labels.emplace_back(reinterpret_cast<const char*>(in.data() + off), len);
      off += len;
    }
    if (off != in.size()) throw InputError("FEAT1: trailing bytes after label block");
  }
  return FeatureMatrix(n, d, std::move(data), std::move(labels));
}

void SaveFeatures(const FeatureMatrix& features, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = EncodeFeatures(features);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
}

FeatureMatrix LoadFeatures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open feature cache " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return DecodeFeatures(bytes);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace transeval

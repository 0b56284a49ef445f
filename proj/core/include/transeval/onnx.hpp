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

#ifndef TRANSEVAL_ONNX_HPP_
#define TRANSEVAL_ONNX_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

// A small CPU interpreter for ONNX operator graphs, covering the operators
// found in ResNet- and Inception-style image classifiers exported from common
// frameworks. See SupportedOps() for the list.
namespace transeval::onnx {

enum class DataType { kFloat, kInt64 };

struct Tensor {
  std::vector<std::int64_t> shape;
  DataType type = DataType::kFloat;
  std::vector<float> f;          // when type == kFloat
  std::vector<std::int64_t> i;   // when type == kInt64

  static Tensor Float(std::vector<std::int64_t> shape, std::vector<float> data);
  static Tensor Int64(std::vector<std::int64_t> shape, std::vector<std::int64_t> data);

  std::size_t numel() const;
  std::size_t rank() const { return shape.size(); }
};

std::size_t ShapeNumel(std::span<const std::int64_t> shape);

struct Graph;  // defined in the implementation

class Model {
 public:
  // Throws InputError when the file is missing, cannot be decoded, uses an
  // operator outside SupportedOps(), or does not have exactly one graph
  // input and one graph output.
  static Model Load(const std::filesystem::path& path);
  static Model Parse(std::span<const std::uint8_t> bytes);

  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;
  ~Model();

  const std::string& input_name() const;
  const std::string& output_name() const;
  // Declared input shape; symbolic or missing dimensions are -1.
  const std::vector<std::int64_t>& input_shape() const;

  // Evaluates the graph. Safe to call concurrently: the model is immutable
  // and every call owns its intermediate tensors.
  Tensor Run(const Tensor& input) const;

 private:
  explicit Model(std::unique_ptr<Graph> graph);
  std::unique_ptr<Graph> graph_;
};

std::vector<std::string> SupportedOps();

}  // namespace transeval::onnx

#endif  // TRANSEVAL_ONNX_HPP_

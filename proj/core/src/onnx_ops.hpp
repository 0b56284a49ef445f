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

#ifndef TRANSEVAL_SRC_ONNX_OPS_HPP_
#define TRANSEVAL_SRC_ONNX_OPS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "onnx_proto.hpp"
#include "transeval/onnx.hpp"

namespace transeval::onnx::ops {

class NodeContext {
 public:
  NodeContext(const proto::Node& node, std::int64_t opset)
      : node_(node), opset_(opset) {}

  const proto::Node& node() const { return node_; }
  std::int64_t opset() const { return opset_; }

  const proto::Attribute* Find(std::string_view name) const;
  std::int64_t Int(std::string_view name, std::int64_t fallback) const;
  float Float(std::string_view name, float fallback) const;
  std::string String(std::string_view name, std::string fallback) const;
  std::vector<std::int64_t> Ints(std::string_view name) const;

  // InputError prefixed with the node's op type and name.
  [[noreturn]] void Fail(const std::string& why) const;

 private:
  const proto::Node& node_;
  std::int64_t opset_;
};

// Inputs are positional; an omitted optional input is nullptr.
using Kernel = std::vector<Tensor> (*)(const NodeContext&,
                                       std::span<const Tensor* const>);

// nullptr when the operator is not implemented.
Kernel FindKernel(std::string_view op_type);
std::vector<std::string> KernelNames();

}  // namespace transeval::onnx::ops

#endif  // TRANSEVAL_SRC_ONNX_OPS_HPP_

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

#ifndef TRANSEVAL_SRC_ONNX_PROTO_HPP_
#define TRANSEVAL_SRC_ONNX_PROTO_HPP_

// Decoded subset of the ONNX protobuf schema (onnx.proto3). Only fields the
// interpreter consumes are kept; everything else is skipped on the wire.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "transeval/onnx.hpp"

namespace transeval::onnx::proto {

enum AttributeType : int {
  kAttrUndefined = 0,
  kAttrFloat = 1,
  kAttrInt = 2,
  kAttrString = 3,
  kAttrTensor = 4,
  kAttrFloats = 6,
  kAttrInts = 7,
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Attribute {
  std::string name;
  int type = kAttrUndefined;
  float f = 0.0f;
  std::int64_t i = 0;
  std::string s;
  std::vector<Tensor> t;  // zero or one element
  std::vector<float> floats;
  std::vector<std::int64_t> ints;
};

struct Node {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string name;
  std::string op_type;
  std::string domain;
  std::vector<Attribute> attributes;
};

struct ValueInfo {
  std::string name;
  int elem_type = 0;
  bool has_shape = false;
  std::vector<std::int64_t> dims;  // -1 for symbolic
};

struct GraphProto {
  std::vector<Node> nodes;
  std::vector<NamedTensor> initializers;
  std::vector<ValueInfo> inputs;
  std::vector<ValueInfo> outputs;
};

struct ModelProto {
  std::int64_t ir_version = 0;
  std::int64_t opset = 0;  // default-domain opset version
  GraphProto graph;
};

// Throws InputError on malformed wire data or unsupported tensor storage.
ModelProto ParseModel(std::span<const std::uint8_t> bytes);

}  // namespace transeval::onnx::proto

#endif  // TRANSEVAL_SRC_ONNX_PROTO_HPP_

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

#include <fstream>
#include <iterator>
#include <memory>
#include <set>
#include <unordered_map>

#include "onnx_ops.hpp"
#include "onnx_proto.hpp"
#include "transeval/error.hpp"
#include "transeval/onnx.hpp"

namespace transeval::onnx {

std::size_t ShapeNumel(std::span<const std::int64_t> shape) {
  std::size_t n = 1;
  for (std::int64_t d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

Tensor Tensor::Float(std::vector<std::int64_t> shape, std::vector<float> data) {
  Tensor t;
  t.shape = std::move(shape);
  t.type = DataType::kFloat;
  t.f = std::move(data);
  return t;
}

Tensor Tensor::Int64(std::vector<std::int64_t> shape, std::vector<std::int64_t> data) {
  Tensor t;
  t.shape = std::move(shape);
  t.type = DataType::kInt64;
  t.i = std::move(data);
  return t;
}

std::size_t Tensor::numel() const { return ShapeNumel(shape); }

struct CompiledNode {
  proto::Node node;
  ops::Kernel kernel = nullptr;
  // Values whose last consumer is this node; released after it runs.
  std::vector<std::string> release;
};

struct Graph {
  std::int64_t opset = 0;
  std::vector<CompiledNode> nodes;
  std::unordered_map<std::string, std::shared_ptr<const Tensor>> initializers;
  std::string input_name;
  std::vector<std::int64_t> input_shape;
  std::string output_name;
};

namespace {

std::unique_ptr<Graph> Compile(proto::ModelProto model) {
  auto graph = std::make_unique<Graph>();
  graph->opset = model.opset;

  for (auto& init : model.graph.initializers) {
    graph->initializers.emplace(
        init.name, std::make_shared<const Tensor>(std::move(init.tensor)));
  }

  std::vector<const proto::ValueInfo*> real_inputs;
  for (const auto& in : model.graph.inputs) {
    if (!graph->initializers.count(in.name)) real_inputs.push_back(&in);
  }
  if (real_inputs.size() != 1) {
    throw InputError("ONNX model must have exactly one image input, found " +
                     std::to_string(real_inputs.size()));
  }
  if (model.graph.outputs.size() != 1) {
    throw InputError("ONNX model must have exactly one output, found " +
                     std::to_string(model.graph.outputs.size()));
  }
  graph->input_name = real_inputs.front()->name;
  graph->input_shape = real_inputs.front()->dims;
  graph->output_name = model.graph.outputs.front().name;

  std::set<std::string> unsupported;
  std::set<std::string> produced = {graph->input_name};
  for (const auto& [name, t] : graph->initializers) produced.insert(name);
  for (auto& node : model.graph.nodes) {
    CompiledNode compiled;
    if (!node.domain.empty() && node.domain != "ai.onnx") {
      unsupported.insert(node.domain + "::" + node.op_type);
    } else {
      compiled.kernel = ops::FindKernel(node.op_type);
      if (compiled.kernel == nullptr) unsupported.insert(node.op_type);
    }
    for (const auto& in : node.inputs) {
      if (!in.empty() && !produced.count(in)) {
        throw InputError("ONNX graph is not topologically sorted: '" + in +
                         "' is consumed before it is produced");
      }
    }
    for (const auto& out : node.outputs) {
      if (!out.empty()) produced.insert(out);
    }
    compiled.node = std::move(node);
    graph->nodes.push_back(std::move(compiled));
  }
  if (!unsupported.empty()) {
    std::string list;
    for (const auto& op : unsupported) list += (list.empty() ? "" : ", ") + op;
    throw InputError("ONNX model uses unsupported operators: " + list);
  }
  if (!produced.count(graph->output_name)) {
    throw InputError("ONNX graph output '" + graph->output_name + "' is never produced");
  }

  std::unordered_map<std::string, std::size_t> last_use;
  for (std::size_t i = 0; i < graph->nodes.size(); ++i) {
    for (const auto& in : graph->nodes[i].node.inputs) {
      if (!in.empty() && !graph->initializers.count(in)) last_use[in] = i;
    }
  }
  for (const auto& [name, index] : last_use) {
    if (name != graph->output_name) graph->nodes[index].release.push_back(name);
  }
  return graph;
}

}  // namespace

Model::Model(std::unique_ptr<Graph> graph) : graph_(std::move(graph)) {}
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

Model Model::Parse(std::span<const std::uint8_t> bytes) {
  return Model(Compile(proto::ParseModel(bytes)));
}

Model Model::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return Parse(bytes);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

const std::string& Model::input_name() const { return graph_->input_name; }
const std::string& Model::output_name() const { return graph_->output_name; }
const std::vector<std::int64_t>& Model::input_shape() const { return graph_->input_shape; }

Tensor Model::Run(const Tensor& input) const {
  if (input.type != DataType::kFloat) throw InputError("model input must be float");
  const auto& declared = graph_->input_shape;
  if (!declared.empty()) {
    if (declared.size() != input.rank()) {
      throw InputError("model expects a rank-" + std::to_string(declared.size()) +
                       " input, got rank " + std::to_string(input.rank()));
    }
    for (std::size_t d = 0; d < declared.size(); ++d) {
      if (declared[d] >= 0 && declared[d] != input.shape[d]) {
        throw InputError("model input dimension " + std::to_string(d) + " must be " +
                         std::to_string(declared[d]) + ", got " +
                         std::to_string(input.shape[d]));
      }
    }
  }

  std::unordered_map<std::string, std::shared_ptr<const Tensor>> values;
  values.emplace(graph_->input_name, std::make_shared<const Tensor>(input));
  auto lookup = [&](const std::string& name) -> const Tensor* {
    if (name.empty()) return nullptr;
    if (auto it = values.find(name); it != values.end()) return it->second.get();
    if (auto it = graph_->initializers.find(name); it != graph_->initializers.end()) {
      return it->second.get();
    }
    throw InputError("ONNX value '" + name + "' was not produced");
  };

  for (const CompiledNode& compiled : graph_->nodes) {
    std::vector<const Tensor*> args;
    args.reserve(compiled.node.inputs.size());
    for (const auto& name : compiled.node.inputs) args.push_back(lookup(name));
    ops::NodeContext ctx(compiled.node, graph_->opset);
    std::vector<Tensor> results = compiled.kernel(ctx, args);
    for (std::size_t k = 0; k < results.size() && k < compiled.node.outputs.size(); ++k) {
      const std::string& name = compiled.node.outputs[k];
      if (!name.empty()) {
        values[name] = std::make_shared<const Tensor>(std::move(results[k]));
      }
    }
    for (const auto& name : compiled.release) values.erase(name);
  }
  return *lookup(graph_->output_name);
}

std::vector<std::string> SupportedOps() { return ops::KernelNames(); }

}  // namespace transeval::onnx

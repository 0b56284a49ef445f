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

#include "onnx_proto.hpp"

#include <bit>
#include <cstring>

#include "transeval/error.hpp"

namespace transeval::onnx::proto {
namespace {

enum WireType : int { kVarint = 0, kFixed64 = 1, kLengthDelimited = 2, kFixed32 = 5 };

// TensorProto.DataType values the interpreter accepts.
enum ElemType : int { kElemFloat = 1, kElemInt32 = 6, kElemInt64 = 7, kElemDouble = 11 };

[[noreturn]] void Malformed(const std::string& why) {
  throw InputError("malformed ONNX model: " + why);
}

class Wire {
 public:
  explicit Wire(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ >= bytes_.size(); }

  std::uint64_t Varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= bytes_.size()) Malformed("truncated varint");
      const std::uint8_t b = bytes_[pos_++];
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return v;
    }
    Malformed("varint longer than 10 bytes");
  }

  // Returns (field number, wire type).
  std::pair<std::uint32_t, int> Key() {
    const std::uint64_t key = Varint();
    return {static_cast<std::uint32_t>(key >> 3), static_cast<int>(key & 7)};
  }

  std::span<const std::uint8_t> Bytes() {
    const std::uint64_t len = Varint();
    if (len > bytes_.size() - pos_) Malformed("length-delimited field overruns buffer");
    auto out = bytes_.subspan(pos_, len);
    pos_ += len;
    return out;
  }

  std::string String() {
    auto b = Bytes();
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }

  std::uint32_t Fixed32() {
    if (bytes_.size() - pos_ < 4) Malformed("truncated fixed32");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

  std::uint64_t Fixed64() {
    if (bytes_.size() - pos_ < 8) Malformed("truncated fixed64");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 8;
    return v;
  }

  void Skip(int wire_type) {
    switch (wire_type) {
      case kVarint:
        Varint();
        break;
      case kFixed64:
        Fixed64();
        break;
      case kLengthDelimited:
        Bytes();
        break;
      case kFixed32:
        Fixed32();
        break;
      default:
        Malformed("unsupported wire type " + std::to_string(wire_type));
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Repeated scalar fields may arrive packed or one element per key.
template <typename T, typename ReadOne>
void ReadRepeated(Wire& w, int wire_type, int scalar_wire_type,
                  std::vector<T>& out, ReadOne read_one) {
  if (wire_type == kLengthDelimited) {
    Wire packed(w.Bytes());
    while (!packed.done()) out.push_back(read_one(packed));
  } else if (wire_type == scalar_wire_type) {
    out.push_back(read_one(w));
  } else {
    Malformed("unexpected wire type for repeated field");
  }
}

std::int64_t AsInt64(std::uint64_t v) { return static_cast<std::int64_t>(v); }

NamedTensor ParseTensor(std::span<const std::uint8_t> bytes) {
  Wire w(bytes);
  NamedTensor out;
  int data_type = 0;
  std::vector<std::int64_t> dims;
  std::vector<float> float_data;
  std::vector<std::int64_t> int_data;  // int32_data and int64_data
  std::vector<double> double_data;
  std::span<const std::uint8_t> raw;
  bool has_raw = false;
  bool external = false;

  while (!w.done()) {
    auto [field, wt] = w.Key();
    switch (field) {
      case 1:
        ReadRepeated(w, wt, kVarint, dims, [](Wire& x) { return AsInt64(x.Varint()); });
        break;
      case 2:
        data_type = static_cast<int>(w.Varint());
        break;
      case 4:
        ReadRepeated(w, wt, kFixed32, float_data,
                     [](Wire& x) { return std::bit_cast<float>(x.Fixed32()); });
        break;
      case 5:
        ReadRepeated(w, wt, kVarint, int_data, [](Wire& x) {
          return static_cast<std::int64_t>(static_cast<std::int32_t>(x.Varint()));
        });
        break;
      case 7:
        ReadRepeated(w, wt, kVarint, int_data, [](Wire& x) { return AsInt64(x.Varint()); });
        break;
      case 8:
        out.name = w.String();
        break;
      case 9:
        raw = w.Bytes();
        has_raw = true;
        break;
      case 10:
        ReadRepeated(w, wt, kFixed64, double_data,
                     [](Wire& x) { return std::bit_cast<double>(x.Fixed64()); });
        break;
      case 14:
        external = w.Varint() == 1;
        break;
      default:
        w.Skip(wt);
    }
  }

  if (external) {
    throw InputError("ONNX tensor '" + out.name +
                     "' uses external data files, which are not supported");
  }
  for (std::int64_t d : dims) {
    if (d < 0) Malformed("negative tensor dimension in '" + out.name + "'");
  }
  const std::size_t n = ShapeNumel(dims);

  auto check_count = [&](std::size_t got) {
    if (got != n) {
      Malformed("tensor '" + out.name + "' holds " + std::to_string(got) +
                " values, shape needs " + std::to_string(n));
    }
  };

  switch (data_type) {
    case kElemFloat: {
      std::vector<float> values;
      if (has_raw) {
        check_count(raw.size() / 4);
        if (raw.size() % 4 != 0) Malformed("ragged float raw_data");
        values.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          std::uint32_t bits = 0;
          for (int b = 3; b >= 0; --b) bits = (bits << 8) | raw[4 * k + b];
          values[k] = std::bit_cast<float>(bits);
        }
      } else {
        check_count(float_data.size());
        values = std::move(float_data);
      }
      out.tensor = Tensor::Float(std::move(dims), std::move(values));
      break;
    }
    case kElemDouble: {
      std::vector<float> values;
      if (has_raw) {
        check_count(raw.size() / 8);
        values.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          std::uint64_t bits = 0;
          for (int b = 7; b >= 0; --b) bits = (bits << 8) | raw[8 * k + b];
          values[k] = static_cast<float>(std::bit_cast<double>(bits));
        }
      } else {
        check_count(double_data.size());
        values.assign(double_data.begin(), double_data.end());
      }
      out.tensor = Tensor::Float(std::move(dims), std::move(values));
      break;
    }
    case kElemInt64:
    case kElemInt32: {
      std::vector<std::int64_t> values;
      if (has_raw) {
        const std::size_t width = data_type == kElemInt64 ? 8 : 4;
        check_count(raw.size() / width);
        values.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          std::uint64_t bits = 0;
          for (int b = static_cast<int>(width) - 1; b >= 0; --b) {
            bits = (bits << 8) | raw[width * k + b];
          }
          values[k] = width == 8 ? static_cast<std::int64_t>(bits)
                                 : static_cast<std::int32_t>(static_cast<std::uint32_t>(bits));
        }
      } else {
        check_count(int_data.size());
        values = std::move(int_data);
      }
      out.tensor = Tensor::Int64(std::move(dims), std::move(values));
      break;
    }
    default:
      throw InputError("ONNX tensor '" + out.name + "' has unsupported data type " +
                       std::to_string(data_type));
  }
  return out;
}

Attribute ParseAttribute(std::span<const std::uint8_t> bytes) {
  Wire w(bytes);
  Attribute a;
  while (!w.done()) {
    auto [field, wt] = w.Key();
    switch (field) {
      case 1:
        a.name = w.String();
        break;
      case 2:
        a.f = std::bit_cast<float>(w.Fixed32());
        break;
      case 3:
        a.i = AsInt64(w.Varint());
        break;
      case 4:
        a.s = w.String();
        break;
      case 5:
        a.t.clear();
        a.t.push_back(ParseTensor(w.Bytes()).tensor);
        break;
      case 7:
        ReadRepeated(w, wt, kFixed32, a.floats,
                     [](Wire& x) { return std::bit_cast<float>(x.Fixed32()); });
        break;
      case 8:
        ReadRepeated(w, wt, kVarint, a.ints, [](Wire& x) { return AsInt64(x.Varint()); });
        break;
      case 20:
        a.type = static_cast<int>(w.Varint());
        break;
      default:
        w.Skip(wt);
    }
  }
  return a;
}

Node ParseNode(std::span<const std::uint8_t> bytes) {
  Wire w(bytes);
  Node n;
  while (!w.done()) {
    auto [field, wt] = w.Key();
    switch (field) {
      case 1:
        n.inputs.push_back(w.String());
        break;
      case 2:
        n.outputs.push_back(w.String());
        break;
      case 3:
        n.name = w.String();
        break;
      case 4:
        n.op_type = w.String();
        break;
      case 5:
        n.attributes.push_back(ParseAttribute(w.Bytes()));
        break;
      case 7:
        n.domain = w.String();
        break;
      default:
        w.Skip(wt);
    }
  }
  return n;
}

void ParseShape(std::span<const std::uint8_t> bytes, ValueInfo& info) {
  Wire w(bytes);
  info.has_shape = true;
  while (!w.done()) {
    auto [field, wt] = w.Key();
    if (field != 1) {
      w.Skip(wt);
      continue;
    }
    Wire dim(w.Bytes());
    std::int64_t value = -1;
    while (!dim.done()) {
      auto [f, dwt] = dim.Key();
      if (f == 1) {
        value = AsInt64(dim.Varint());
      } else {
        dim.Skip(dwt);
      }
    }
    info.dims.push_back(value);
  }
}

ValueInfo ParseValueInfo(std::span<const std::uint8_t> bytes) {
  Wire w(bytes);
  ValueInfo info;
  while (!w.done()) {
    auto [field, wt] = w.Key();
    if (field == 1) {
      info.name = w.String();
    } else if (field == 2) {
      Wire type(w.Bytes());
      while (!type.done()) {
        auto [tf, twt] = type.Key();
        if (tf != 1) {
          type.Skip(twt);
          continue;
        }
        Wire tensor_type(type.Bytes());
        while (!tensor_type.done()) {
          auto [f, fwt] = tensor_type.Key();
          if (f == 1) {
            info.elem_type = static_cast<int>(tensor_type.Varint());
          } else if (f == 2) {
            ParseShape(tensor_type.Bytes(), info);
          } else {
            tensor_type.Skip(fwt);
          }
        }
      }
    } else {
      w.Skip(wt);
    }
  }
  return info;
}

GraphProto ParseGraph(std::span<const std::uint8_t> bytes) {
  Wire w(bytes);
  GraphProto g;
  while (!w.done()) {
    auto [field, wt] = w.Key();
    switch (field) {
      case 1:
        g.nodes.push_back(ParseNode(w.Bytes()));
        break;
      case 5:
        g.initializers.push_back(ParseTensor(w.Bytes()));
        break;
      case 11:
        g.inputs.push_back(ParseValueInfo(w.Bytes()));
        break;
      case 12:
        g.outputs.push_back(ParseValueInfo(w.Bytes()));
        break;
      default:
        w.Skip(wt);
    }
  }
  return g;
}

}  // namespace

ModelProto ParseModel(std::span<const std::uint8_t> bytes) {
  Wire w(bytes);
  ModelProto m;
  bool has_graph = false;
  while (!w.done()) {
    auto [field, wt] = w.Key();
    switch (field) {
      case 1:
        m.ir_version = AsInt64(w.Varint());
        break;
      case 7:
        m.graph = ParseGraph(w.Bytes());
        has_graph = true;
        break;
      case 8: {
        Wire opset(w.Bytes());
        std::string domain;
        std::int64_t version = 0;
        while (!opset.done()) {
          auto [f, owt] = opset.Key();
          if (f == 1) {
            domain = opset.String();
          } else if (f == 2) {
            version = AsInt64(opset.Varint());
          } else {
            opset.Skip(owt);
          }
        }
        if (domain.empty() || domain == "ai.onnx") m.opset = version;
        break;
      }
      default:
        w.Skip(wt);
    }
  }
  if (!has_graph) Malformed("no graph");
  return m;
}

}  // namespace transeval::onnx::proto

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

#include "onnx_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Core>

#include "transeval/error.hpp"

namespace transeval::onnx::ops {
namespace {

using RowMajorF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<std::int64_t>;

const Tensor& Input(const NodeContext& ctx, std::span<const Tensor* const> in,
                    std::size_t i) {
  if (i >= in.size() || in[i] == nullptr) {
    ctx.Fail("missing input #" + std::to_string(i));
  }
  return *in[i];
}

const Tensor* Optional(std::span<const Tensor* const> in, std::size_t i) {
  return i < in.size() ? in[i] : nullptr;
}

const Tensor& FloatInput(const NodeContext& ctx, std::span<const Tensor* const> in,
                         std::size_t i) {
  const Tensor& t = Input(ctx, in, i);
  if (t.type != DataType::kFloat) ctx.Fail("input #" + std::to_string(i) + " must be float");
  return t;
}

std::vector<std::int64_t> IntValues(const NodeContext& ctx, const Tensor& t) {
  if (t.type != DataType::kInt64) ctx.Fail("expected an integer tensor");
  return t.i;
}

std::int64_t NormalizeAxis(const NodeContext& ctx, std::int64_t axis, std::size_t rank) {
  const auto r = static_cast<std::int64_t>(rank);
  if (axis < -r || axis >= r) {
    ctx.Fail("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
  }
  return axis < 0 ? axis + r : axis;
}

std::vector<std::size_t> Strides(const Shape& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (int d = static_cast<int>(shape.size()) - 2; d >= 0; --d) {
    s[d] = s[d + 1] * static_cast<std::size_t>(shape[d + 1]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Spatial window geometry shared by Conv and pooling.

struct Window {
  std::int64_t kernel[2];
  std::int64_t stride[2];
  std::int64_t dilation[2];
  std::int64_t pad_begin[2];
  std::int64_t pad_end[2];
  std::int64_t out[2];
};

Window ResolveWindow(const NodeContext& ctx, const Shape& x_shape,
                     const std::int64_t kernel_hw[2], bool allow_ceil) {
  if (x_shape.size() != 4) ctx.Fail("only 2-D spatial (NCHW) inputs are supported");
  Window w{};
  const auto strides = ctx.Ints("strides");
  const auto dilations = ctx.Ints("dilations");
  const auto pads = ctx.Ints("pads");
  const std::string auto_pad = ctx.String("auto_pad", "NOTSET");
  const bool ceil_mode = allow_ceil && ctx.Int("ceil_mode", 0) != 0;
  for (int d = 0; d < 2; ++d) {
    w.kernel[d] = kernel_hw[d];
    w.stride[d] = strides.empty() ? 1 : strides.at(d);
    w.dilation[d] = dilations.empty() ? 1 : dilations.at(d);
    w.pad_begin[d] = pads.empty() ? 0 : pads.at(d);
    w.pad_end[d] = pads.empty() ? 0 : pads.at(d + 2);
    if (w.stride[d] <= 0 || w.dilation[d] <= 0 || w.kernel[d] <= 0) {
      ctx.Fail("non-positive kernel, stride or dilation");
    }
    const std::int64_t in = x_shape[2 + d];
    const std::int64_t extent = (w.kernel[d] - 1) * w.dilation[d] + 1;
    if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
      const std::int64_t out = (in + w.stride[d] - 1) / w.stride[d];
      const std::int64_t total =
          std::max<std::int64_t>(0, (out - 1) * w.stride[d] + extent - in);
      w.pad_begin[d] = auto_pad == "SAME_UPPER" ? total / 2 : total - total / 2;
      w.pad_end[d] = total - w.pad_begin[d];
    } else if (auto_pad == "VALID") {
      w.pad_begin[d] = w.pad_end[d] = 0;
    } else if (auto_pad != "NOTSET") {
      ctx.Fail("unknown auto_pad " + auto_pad);
    }
    const std::int64_t span = in + w.pad_begin[d] + w.pad_end[d] - extent;
    if (span < 0) ctx.Fail("window larger than padded input");
    if (ceil_mode) {
      w.out[d] = (span + w.stride[d] - 1) / w.stride[d] + 1;
      // The last window has to start inside the input or the leading pad.
      if ((w.out[d] - 1) * w.stride[d] >= in + w.pad_begin[d]) --w.out[d];
    } else {
      w.out[d] = span / w.stride[d] + 1;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Convolution via im2col + GEMM.

std::vector<Tensor> Conv(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = FloatInput(ctx, in, 0);
  const Tensor& weight = FloatInput(ctx, in, 1);
  const Tensor* bias = Optional(in, 2);
  if (weight.rank() != 4 || x.rank() != 4) ctx.Fail("only 2-D convolution is supported");

  const std::int64_t group = ctx.Int("group", 1);
  const std::int64_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::int64_t m = weight.shape[0], cg = weight.shape[1];
  if (group <= 0 || c != cg * group || m % group != 0) {
    ctx.Fail("channel/group mismatch");
  }
  if (bias != nullptr && (bias->type != DataType::kFloat || bias->numel() != static_cast<std::size_t>(m))) {
    ctx.Fail("bias must be a float vector of length M");
  }
  const std::int64_t kernel[2] = {weight.shape[2], weight.shape[3]};
  const auto declared = ctx.Ints("kernel_shape");
  if (!declared.empty() && (declared.size() != 2 || declared[0] != kernel[0] || declared[1] != kernel[1])) {
    ctx.Fail("kernel_shape disagrees with weight shape");
  }
  const Window w = ResolveWindow(ctx, x.shape, kernel, false);
  const std::int64_t oh = w.out[0], ow = w.out[1];
  const std::int64_t mg = m / group;
  const std::int64_t k = cg * kernel[0] * kernel[1];
  const std::int64_t plane = oh * ow;

  Tensor y = Tensor::Float({n, m, oh, ow}, std::vector<float>(ShapeNumel(Shape{n, m, oh, ow})));
  const bool pointwise = kernel[0] == 1 && kernel[1] == 1 && w.stride[0] == 1 &&
                         w.stride[1] == 1 && w.pad_begin[0] == 0 &&
                         w.pad_begin[1] == 0 && w.pad_end[0] == 0 && w.pad_end[1] == 0;
  std::vector<float> col;
  if (!pointwise) col.resize(static_cast<std::size_t>(k * plane));

  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t g = 0; g < group; ++g) {
      const float* src = x.f.data() + ((b * c + g * cg) * h * wd);
      const float* cols = src;
      if (!pointwise) {
        for (std::int64_t ch = 0; ch < cg; ++ch) {
          for (std::int64_t kh = 0; kh < kernel[0]; ++kh) {
            for (std::int64_t kw = 0; kw < kernel[1]; ++kw) {
              float* dst = col.data() + ((ch * kernel[0] + kh) * kernel[1] + kw) * plane;
              for (std::int64_t y0 = 0; y0 < oh; ++y0) {
                const std::int64_t iy = y0 * w.stride[0] - w.pad_begin[0] + kh * w.dilation[0];
                for (std::int64_t x0 = 0; x0 < ow; ++x0) {
                  const std::int64_t ix = x0 * w.stride[1] - w.pad_begin[1] + kw * w.dilation[1];
                  dst[y0 * ow + x0] = (iy >= 0 && iy < h && ix >= 0 && ix < wd)
                                          ? src[(ch * h + iy) * wd + ix]
                                          : 0.0f;
                }
              }
            }
          }
        }
        cols = col.data();
      }
      Eigen::Map<const RowMajorF> wmat(weight.f.data() + g * mg * k, mg, k);
      Eigen::Map<const RowMajorF> cmat(cols, k, plane);
      Eigen::Map<RowMajorF> out(y.f.data() + (b * m + g * mg) * plane, mg, plane);
      out.noalias() = wmat * cmat;
      if (bias != nullptr) {
        for (std::int64_t oc = 0; oc < mg; ++oc) {
          out.row(oc).array() += bias->f[g * mg + oc];
        }
      }
    }
  }
  return {std::move(y)};
}

// ---------------------------------------------------------------------------
// Pooling.

std::vector<Tensor> Pool(const NodeContext& ctx, std::span<const Tensor* const> in,
                         bool is_max) {
  const Tensor& x = FloatInput(ctx, in, 0);
  const auto ks = ctx.Ints("kernel_shape");
  if (ks.size() != 2) ctx.Fail("kernel_shape must have two entries");
  const std::int64_t kernel[2] = {ks[0], ks[1]};
  const Window w = ResolveWindow(ctx, x.shape, kernel, true);
  const bool include_pad = ctx.Int("count_include_pad", 0) != 0;
  const std::int64_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const std::int64_t oh = w.out[0], ow = w.out[1];
  Tensor y = Tensor::Float({n, c, oh, ow}, std::vector<float>(ShapeNumel(Shape{n, c, oh, ow})));

  for (std::int64_t p = 0; p < n * c; ++p) {
    const float* src = x.f.data() + p * h * wd;
    float* dst = y.f.data() + p * oh * ow;
    for (std::int64_t y0 = 0; y0 < oh; ++y0) {
      for (std::int64_t x0 = 0; x0 < ow; ++x0) {
        float best = -std::numeric_limits<float>::infinity();
        double sum = 0.0;
        std::int64_t valid = 0, padded = 0;
        for (std::int64_t kh = 0; kh < kernel[0]; ++kh) {
          const std::int64_t iy = y0 * w.stride[0] - w.pad_begin[0] + kh * w.dilation[0];
          for (std::int64_t kw = 0; kw < kernel[1]; ++kw) {
            const std::int64_t ix = x0 * w.stride[1] - w.pad_begin[1] + kw * w.dilation[1];
            const bool inside = iy >= 0 && iy < h && ix >= 0 && ix < wd;
            const bool in_pad_area = iy >= -w.pad_begin[0] && iy < h + w.pad_end[0] &&
                                     ix >= -w.pad_begin[1] && ix < wd + w.pad_end[1];
            if (in_pad_area) ++padded;
            if (!inside) continue;
            const float v = src[iy * wd + ix];
            best = std::max(best, v);
            sum += v;
            ++valid;
          }
        }
        if (is_max) {
          dst[y0 * ow + x0] = best;
        } else {
          const std::int64_t divisor = include_pad ? padded : valid;
          dst[y0 * ow + x0] = divisor > 0 ? static_cast<float>(sum / divisor) : 0.0f;
        }
      }
    }
  }
  return {std::move(y)};
}

std::vector<Tensor> MaxPool(const NodeContext& ctx, std::span<const Tensor* const> in) {
  if (ctx.node().outputs.size() > 1 && !ctx.node().outputs[1].empty()) {
    ctx.Fail("the Indices output is not supported");
  }
  return Pool(ctx, in, true);
}

std::vector<Tensor> AveragePool(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Pool(ctx, in, false);
}

std::vector<Tensor> GlobalPool(const NodeContext& ctx, std::span<const Tensor* const> in,
                               bool is_max) {
  const Tensor& x = FloatInput(ctx, in, 0);
  if (x.rank() < 3) ctx.Fail("expected rank >= 3");
  const std::int64_t n = x.shape[0], c = x.shape[1];
  const std::size_t plane = ShapeNumel(std::span(x.shape).subspan(2));
  Shape out_shape = {n, c};
  out_shape.resize(x.rank(), 1);
  std::vector<float> out(static_cast<std::size_t>(n * c));
  for (std::size_t p = 0; p < out.size(); ++p) {
    const float* src = x.f.data() + p * plane;
    if (is_max) {
      out[p] = *std::max_element(src, src + plane);
    } else {
      double sum = 0.0;
      for (std::size_t i = 0; i < plane; ++i) sum += src[i];
      out[p] = static_cast<float>(sum / static_cast<double>(plane));
    }
  }
  return {Tensor::Float(std::move(out_shape), std::move(out))};
}

std::vector<Tensor> GlobalAveragePool(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return GlobalPool(ctx, in, false);
}

std::vector<Tensor> GlobalMaxPool(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return GlobalPool(ctx, in, true);
}

// ---------------------------------------------------------------------------
// Normalization and activations.

std::vector<Tensor> BatchNormalization(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = FloatInput(ctx, in, 0);
  const Tensor& scale = FloatInput(ctx, in, 1);
  const Tensor& shift = FloatInput(ctx, in, 2);
  const Tensor& mean = FloatInput(ctx, in, 3);
  const Tensor& var = FloatInput(ctx, in, 4);
  if (ctx.node().outputs.size() > 1) {
    for (std::size_t i = 1; i < ctx.node().outputs.size(); ++i) {
      if (!ctx.node().outputs[i].empty()) ctx.Fail("training-mode outputs are not supported");
    }
  }
  if (x.rank() < 2) ctx.Fail("expected rank >= 2");
  const double eps = ctx.Float("epsilon", 1e-5f);
  const std::int64_t n = x.shape[0], c = x.shape[1];
  const std::size_t plane = ShapeNumel(std::span(x.shape).subspan(2));
  for (const Tensor* t : {&scale, &shift, &mean, &var}) {
    if (t->numel() != static_cast<std::size_t>(c)) ctx.Fail("parameter length != channels");
  }
  Tensor y = x;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(var.f[ch]) + eps);
    const float a = static_cast<float>(scale.f[ch] * inv);
    const float b = static_cast<float>(shift.f[ch] - mean.f[ch] * scale.f[ch] * inv);
    for (std::int64_t b0 = 0; b0 < n; ++b0) {
      float* p = y.f.data() + (b0 * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] * a + b;
    }
  }
  return {std::move(y)};
}

template <typename Fn>
std::vector<Tensor> Unary(const NodeContext& ctx, std::span<const Tensor* const> in, Fn fn) {
  Tensor y = FloatInput(ctx, in, 0);
  for (float& v : y.f) v = fn(v);
  return {std::move(y)};
}

std::vector<Tensor> Relu(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Unary(ctx, in, [](float v) { return v > 0.0f ? v : 0.0f; });
}

std::vector<Tensor> Sigmoid(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Unary(ctx, in, [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
}

std::vector<Tensor> Clip(const NodeContext& ctx, std::span<const Tensor* const> in) {
  float lo = -std::numeric_limits<float>::infinity();
  float hi = std::numeric_limits<float>::infinity();
  if (ctx.opset() < 11) {
    lo = ctx.Float("min", lo);
    hi = ctx.Float("max", hi);
  } else {
    if (const Tensor* t = Optional(in, 1); t != nullptr && t->numel() == 1) lo = t->f.at(0);
    if (const Tensor* t = Optional(in, 2); t != nullptr && t->numel() == 1) hi = t->f.at(0);
  }
  return Unary(ctx, in, [lo, hi](float v) { return std::min(std::max(v, lo), hi); });
}

std::vector<Tensor> Identity(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return {Input(ctx, in, 0)};
}

// ---------------------------------------------------------------------------
// Broadcasting element-wise arithmetic.

Shape BroadcastShape(const NodeContext& ctx, const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    const std::int64_t da = d + a.size() >= rank ? a[d + a.size() - rank] : 1;
    const std::int64_t db = d + b.size() >= rank ? b[d + b.size() - rank] : 1;
    if (da != db && da != 1 && db != 1) ctx.Fail("shapes are not broadcastable");
    out[d] = da == 1 ? db : da;
  }
  return out;
}

// Flat source offsets of `in_shape` for every element of `out_shape`.
std::vector<std::size_t> BroadcastIndex(const Shape& in_shape, const Shape& out_shape) {
  const std::size_t rank = out_shape.size();
  Shape padded(rank, 1);
  std::copy(in_shape.begin(), in_shape.end(), padded.begin() + (rank - in_shape.size()));
  const auto in_strides = Strides(padded);
  const std::size_t total = ShapeNumel(out_shape);
  std::vector<std::size_t> index(total);
  std::vector<std::int64_t> pos(rank, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t off = 0;
    for (std::size_t d = 0; d < rank; ++d) {
      if (padded[d] != 1) off += static_cast<std::size_t>(pos[d]) * in_strides[d];
    }
    index[flat] = off;
    for (int d = static_cast<int>(rank) - 1; d >= 0; --d) {
      if (++pos[d] < out_shape[d]) break;
      pos[d] = 0;
    }
  }
  return index;
}

template <typename T, typename Fn>
std::vector<T> Combine(const std::vector<T>& a, const Shape& as, const std::vector<T>& b,
                       const Shape& bs, const Shape& out_shape, Fn fn) {
  const std::size_t total = ShapeNumel(out_shape);
  std::vector<T> out(total);
  if (as == out_shape && bs == out_shape) {
    for (std::size_t i = 0; i < total; ++i) out[i] = fn(a[i], b[i]);
  } else if (as == out_shape && b.size() == 1) {
    for (std::size_t i = 0; i < total; ++i) out[i] = fn(a[i], b[0]);
  } else {
    const auto ia = BroadcastIndex(as, out_shape);
    const auto ib = BroadcastIndex(bs, out_shape);
    for (std::size_t i = 0; i < total; ++i) out[i] = fn(a[ia[i]], b[ib[i]]);
  }
  return out;
}

template <typename FloatFn, typename IntFn>
std::vector<Tensor> Binary(const NodeContext& ctx, std::span<const Tensor* const> in,
                           FloatFn ffn, IntFn ifn) {
  const Tensor& a = Input(ctx, in, 0);
  const Tensor& b = Input(ctx, in, 1);
  if (a.type != b.type) ctx.Fail("operand types differ");
  const Shape out_shape = BroadcastShape(ctx, a.shape, b.shape);
  if (a.type == DataType::kFloat) {
    return {Tensor::Float(out_shape, Combine(a.f, a.shape, b.f, b.shape, out_shape, ffn))};
  }
  return {Tensor::Int64(out_shape, Combine(a.i, a.shape, b.i, b.shape, out_shape, ifn))};
}

std::vector<Tensor> Add(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Binary(ctx, in, std::plus<float>(), std::plus<std::int64_t>());
}

std::vector<Tensor> Sub(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Binary(ctx, in, std::minus<float>(), std::minus<std::int64_t>());
}

std::vector<Tensor> Mul(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Binary(ctx, in, std::multiplies<float>(), std::multiplies<std::int64_t>());
}

std::vector<Tensor> Div(const NodeContext& ctx, std::span<const Tensor* const> in) {
  return Binary(ctx, in, std::divides<float>(), [&ctx](std::int64_t x, std::int64_t y) {
    if (y == 0) ctx.Fail("integer division by zero");
    return x / y;
  });
}

// ---------------------------------------------------------------------------
// Dense layers.

std::vector<Tensor> Gemm(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& a = FloatInput(ctx, in, 0);
  const Tensor& b = FloatInput(ctx, in, 1);
  const Tensor* c = Optional(in, 2);
  if (a.rank() != 2 || b.rank() != 2) ctx.Fail("Gemm operands must be matrices");
  const bool ta = ctx.Int("transA", 0) != 0;
  const bool tb = ctx.Int("transB", 0) != 0;
  const float alpha = ctx.Float("alpha", 1.0f);
  const float beta = ctx.Float("beta", 1.0f);

  Eigen::Map<const RowMajorF> am(a.f.data(), a.shape[0], a.shape[1]);
  Eigen::Map<const RowMajorF> bm(b.f.data(), b.shape[0], b.shape[1]);
  const std::int64_t m = ta ? a.shape[1] : a.shape[0];
  const std::int64_t k = ta ? a.shape[0] : a.shape[1];
  const std::int64_t n = tb ? b.shape[0] : b.shape[1];
  if ((tb ? b.shape[1] : b.shape[0]) != k) ctx.Fail("inner dimensions differ");

  Tensor y = Tensor::Float({m, n}, std::vector<float>(static_cast<std::size_t>(m * n)));
  Eigen::Map<RowMajorF> ym(y.f.data(), m, n);
  if (ta && tb) {
    ym.noalias() = am.transpose() * bm.transpose();
  } else if (ta) {
    ym.noalias() = am.transpose() * bm;
  } else if (tb) {
    ym.noalias() = am * bm.transpose();
  } else {
    ym.noalias() = am * bm;
  }
  if (alpha != 1.0f) ym *= alpha;
  if (c != nullptr) {
    if (c->type != DataType::kFloat) ctx.Fail("C must be float");
    const Shape out_shape = {m, n};
    if (BroadcastShape(ctx, c->shape, out_shape) != out_shape) {
      ctx.Fail("C is not broadcastable to the output");
    }
    const auto ic = BroadcastIndex(c->shape, out_shape);
    for (std::size_t i = 0; i < y.f.size(); ++i) y.f[i] += beta * c->f[ic[i]];
  }
  return {std::move(y)};
}

std::vector<Tensor> MatMul(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& a = FloatInput(ctx, in, 0);
  const Tensor& b = FloatInput(ctx, in, 1);
  if (a.rank() < 2 || b.rank() != 2) {
    ctx.Fail("only [..., M, K] x [K, N] products are supported");
  }
  const std::int64_t k = a.shape.back();
  if (b.shape[0] != k) ctx.Fail("inner dimensions differ");
  const std::int64_t n = b.shape[1];
  const std::int64_t rows = static_cast<std::int64_t>(a.numel()) / k;
  Shape out_shape = a.shape;
  out_shape.back() = n;
  Tensor y = Tensor::Float(out_shape, std::vector<float>(static_cast<std::size_t>(rows * n)));
  Eigen::Map<const RowMajorF> am(a.f.data(), rows, k);
  Eigen::Map<const RowMajorF> bm(b.f.data(), k, n);
  Eigen::Map<RowMajorF>(y.f.data(), rows, n).noalias() = am * bm;
  return {std::move(y)};
}

// ---------------------------------------------------------------------------
// Shape manipulation.

Tensor WithShape(const Tensor& t, Shape shape) {
  Tensor out = t;
  out.shape = std::move(shape);
  return out;
}

std::vector<Tensor> Flatten(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = Input(ctx, in, 0);
  std::int64_t axis = ctx.Int("axis", 1);
  if (axis < 0) axis += static_cast<std::int64_t>(x.rank());
  if (axis < 0 || axis > static_cast<std::int64_t>(x.rank())) ctx.Fail("axis out of range");
  const std::int64_t outer = static_cast<std::int64_t>(
      ShapeNumel(std::span(x.shape).subspan(0, axis)));
  const std::int64_t inner = static_cast<std::int64_t>(x.numel()) / std::max<std::int64_t>(outer, 1);
  return {WithShape(x, {outer, inner})};
}

std::vector<Tensor> Reshape(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = Input(ctx, in, 0);
  Shape target = IntValues(ctx, Input(ctx, in, 1));
  const bool allow_zero = ctx.Int("allowzero", 0) != 0;
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t d = 0; d < target.size(); ++d) {
    if (target[d] == 0 && !allow_zero) {
      if (d >= x.rank()) ctx.Fail("0 in shape refers past input rank");
      target[d] = x.shape[d];
    }
    if (target[d] == -1) {
      if (infer >= 0) ctx.Fail("more than one -1 in shape");
      infer = static_cast<int>(d);
    } else if (target[d] < 0) {
      ctx.Fail("negative dimension in shape");
    } else {
      known *= target[d];
    }
  }
  if (infer >= 0) {
    if (known == 0) ctx.Fail("cannot infer dimension with zero-sized shape");
    target[infer] = static_cast<std::int64_t>(x.numel()) / known;
  }
  if (ShapeNumel(target) != x.numel()) ctx.Fail("element count changes under reshape");
  return {WithShape(x, std::move(target))};
}

std::vector<std::int64_t> AxesFrom(const NodeContext& ctx, std::span<const Tensor* const> in,
                                   std::int64_t input_since_opset) {
  if (ctx.opset() >= input_since_opset) {
    const Tensor* t = Optional(in, 1);
    return t == nullptr ? std::vector<std::int64_t>{} : IntValues(ctx, *t);
  }
  return ctx.Ints("axes");
}

std::vector<Tensor> Unsqueeze(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = Input(ctx, in, 0);
  auto axes = AxesFrom(ctx, in, 13);
  const std::size_t rank = x.rank() + axes.size();
  for (auto& a : axes) a = NormalizeAxis(ctx, a, rank);
  std::sort(axes.begin(), axes.end());
  Shape out;
  std::size_t src = 0;
  for (std::size_t d = 0; d < rank; ++d) {
    if (std::binary_search(axes.begin(), axes.end(), static_cast<std::int64_t>(d))) {
      out.push_back(1);
    } else {
      out.push_back(x.shape.at(src++));
    }
  }
  return {WithShape(x, std::move(out))};
}

std::vector<Tensor> Squeeze(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = Input(ctx, in, 0);
  auto axes = AxesFrom(ctx, in, 13);
  for (auto& a : axes) a = NormalizeAxis(ctx, a, x.rank());
  Shape out;
  for (std::size_t d = 0; d < x.rank(); ++d) {
    const bool listed = std::find(axes.begin(), axes.end(), static_cast<std::int64_t>(d)) != axes.end();
    if (listed && x.shape[d] != 1) ctx.Fail("cannot squeeze a dimension that is not 1");
    if (listed || (axes.empty() && x.shape[d] == 1)) continue;
    out.push_back(x.shape[d]);
  }
  return {WithShape(x, std::move(out))};
}

std::vector<Tensor> Concat(const NodeContext& ctx, std::span<const Tensor* const> in) {
  if (in.empty()) ctx.Fail("no inputs");
  const Tensor& first = Input(ctx, in, 0);
  const std::int64_t axis = NormalizeAxis(ctx, ctx.Int("axis", 0), first.rank());
  Shape out_shape = first.shape;
  out_shape[axis] = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Tensor& t = Input(ctx, in, i);
    if (t.type != first.type || t.rank() != first.rank()) ctx.Fail("inputs disagree in type or rank");
    for (std::size_t d = 0; d < t.rank(); ++d) {
      if (static_cast<std::int64_t>(d) != axis && t.shape[d] != first.shape[d]) {
        ctx.Fail("inputs disagree outside the concat axis");
      }
    }
    out_shape[axis] += t.shape[axis];
  }
  const std::size_t outer = ShapeNumel(std::span(first.shape).subspan(0, axis));
  Tensor out;
  out.shape = out_shape;
  out.type = first.type;
  auto append = [&](auto& dst, auto member) {
    dst.reserve(ShapeNumel(out_shape));
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < in.size(); ++i) {
        const Tensor& t = *in[i];
        const std::size_t chunk = ShapeNumel(std::span(t.shape).subspan(axis));
        const auto& src = t.*member;
        dst.insert(dst.end(), src.begin() + o * chunk, src.begin() + (o + 1) * chunk);
      }
    }
  };
  if (first.type == DataType::kFloat) {
    append(out.f, &Tensor::f);
  } else {
    append(out.i, &Tensor::i);
  }
  return {std::move(out)};
}

std::vector<Tensor> ShapeOp(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = Input(ctx, in, 0);
  const auto r = static_cast<std::int64_t>(x.rank());
  std::int64_t start = ctx.Int("start", 0);
  std::int64_t end = ctx.Int("end", r);
  if (start < 0) start += r;
  if (end < 0) end += r;
  start = std::clamp<std::int64_t>(start, 0, r);
  end = std::clamp<std::int64_t>(end, start, r);
  std::vector<std::int64_t> dims(x.shape.begin() + start, x.shape.begin() + end);
  const auto len = static_cast<std::int64_t>(dims.size());
  return {Tensor::Int64({len}, std::move(dims))};
}

std::vector<Tensor> Gather(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& data = Input(ctx, in, 0);
  const Tensor& indices = Input(ctx, in, 1);
  const auto idx = IntValues(ctx, indices);
  if (data.rank() == 0) ctx.Fail("cannot gather from a scalar");
  const std::int64_t axis = NormalizeAxis(ctx, ctx.Int("axis", 0), data.rank());
  const std::int64_t extent = data.shape[axis];
  const std::size_t outer = ShapeNumel(std::span(data.shape).subspan(0, axis));
  const std::size_t inner = ShapeNumel(std::span(data.shape).subspan(axis + 1));

  Shape out_shape(data.shape.begin(), data.shape.begin() + axis);
  out_shape.insert(out_shape.end(), indices.shape.begin(), indices.shape.end());
  out_shape.insert(out_shape.end(), data.shape.begin() + axis + 1, data.shape.end());

  Tensor out;
  out.shape = out_shape;
  out.type = data.type;
  auto gather = [&](auto& dst, const auto& src) {
    dst.reserve(ShapeNumel(out_shape));
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::int64_t k : idx) {
        if (k < -extent || k >= extent) ctx.Fail("gather index out of range");
        if (k < 0) k += extent;
        const auto begin = src.begin() + (o * extent + k) * inner;
        dst.insert(dst.end(), begin, begin + inner);
      }
    }
  };
  if (data.type == DataType::kFloat) {
    gather(out.f, data.f);
  } else {
    gather(out.i, data.i);
  }
  return {std::move(out)};
}

std::vector<Tensor> ReduceMean(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = FloatInput(ctx, in, 0);
  auto axes = AxesFrom(ctx, in, 18);
  const bool keepdims = ctx.Int("keepdims", 1) != 0;
  if (axes.empty()) {
    if (ctx.Int("noop_with_empty_axes", 0) != 0) return {x};
    axes.resize(x.rank());
    std::iota(axes.begin(), axes.end(), 0);
  }
  std::vector<bool> reduce(x.rank(), false);
  for (auto a : axes) reduce[NormalizeAxis(ctx, a, x.rank())] = true;

  Shape kept_shape = x.shape;
  for (std::size_t d = 0; d < x.rank(); ++d) {
    if (reduce[d]) kept_shape[d] = 1;
  }
  const std::size_t out_n = ShapeNumel(kept_shape);
  std::vector<double> sums(out_n, 0.0);
  const auto out_strides = Strides(kept_shape);
  std::vector<std::int64_t> pos(x.rank(), 0);
  for (std::size_t flat = 0; flat < x.numel(); ++flat) {
    std::size_t off = 0;
    for (std::size_t d = 0; d < x.rank(); ++d) {
      if (!reduce[d]) off += static_cast<std::size_t>(pos[d]) * out_strides[d];
    }
    sums[off] += x.f[flat];
    for (int d = static_cast<int>(x.rank()) - 1; d >= 0; --d) {
      if (++pos[d] < x.shape[d]) break;
      pos[d] = 0;
    }
  }
  const double count = static_cast<double>(x.numel()) / static_cast<double>(out_n);
  std::vector<float> out(out_n);
  for (std::size_t i = 0; i < out_n; ++i) out[i] = static_cast<float>(sums[i] / count);

  Shape out_shape;
  for (std::size_t d = 0; d < x.rank(); ++d) {
    if (!reduce[d]) {
      out_shape.push_back(x.shape[d]);
    } else if (keepdims) {
      out_shape.push_back(1);
    }
  }
  return {Tensor::Float(std::move(out_shape), std::move(out))};
}

std::vector<Tensor> Cast(const NodeContext& ctx, std::span<const Tensor* const> in) {
  const Tensor& x = Input(ctx, in, 0);
  const std::int64_t to = ctx.Int("to", 0);
  if (to == 1 || to == 11) {
    if (x.type == DataType::kFloat) return {x};
    return {Tensor::Float(x.shape, std::vector<float>(x.i.begin(), x.i.end()))};
  }
  if (to == 7 || to == 6) {
    if (x.type == DataType::kInt64) return {x};
    std::vector<std::int64_t> v(x.f.size());
    std::transform(x.f.begin(), x.f.end(), v.begin(),
                   [](float f) { return static_cast<std::int64_t>(f); });
    return {Tensor::Int64(x.shape, std::move(v))};
  }
  ctx.Fail("unsupported cast target type " + std::to_string(to));
}

std::vector<Tensor> Constant(const NodeContext& ctx, std::span<const Tensor* const>) {
  if (const auto* a = ctx.Find("value"); a != nullptr && !a->t.empty()) return {a->t.front()};
  if (const auto* a = ctx.Find("value_float")) return {Tensor::Float({}, {a->f})};
  if (const auto* a = ctx.Find("value_floats")) {
    return {Tensor::Float({static_cast<std::int64_t>(a->floats.size())}, a->floats)};
  }
  if (const auto* a = ctx.Find("value_int")) return {Tensor::Int64({}, {a->i})};
  if (const auto* a = ctx.Find("value_ints")) {
    return {Tensor::Int64({static_cast<std::int64_t>(a->ints.size())}, a->ints)};
  }
  ctx.Fail("unsupported Constant payload");
}

const std::map<std::string, Kernel, std::less<>>& Registry() {
  static const std::map<std::string, Kernel, std::less<>> kRegistry = {
      {"Add", Add},
      {"AveragePool", AveragePool},
      {"BatchNormalization", BatchNormalization},
      {"Cast", Cast},
      {"Clip", Clip},
      {"Concat", Concat},
      {"Constant", Constant},
      {"Conv", Conv},
      {"Div", Div},
      {"Dropout", Identity},
      {"Flatten", Flatten},
      {"Gather", Gather},
      {"Gemm", Gemm},
      {"GlobalAveragePool", GlobalAveragePool},
      {"GlobalMaxPool", GlobalMaxPool},
      {"Identity", Identity},
      {"MatMul", MatMul},
      {"MaxPool", MaxPool},
      {"Mul", Mul},
      {"ReduceMean", ReduceMean},
      {"Relu", Relu},
      {"Reshape", Reshape},
      {"Shape", ShapeOp},
      {"Sigmoid", Sigmoid},
      {"Squeeze", Squeeze},
      {"Sub", Sub},
      {"Unsqueeze", Unsqueeze},
  };
  return kRegistry;
}

}  // namespace

const proto::Attribute* NodeContext::Find(std::string_view name) const {
  for (const auto& a : node_.attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::int64_t NodeContext::Int(std::string_view name, std::int64_t fallback) const {
  const auto* a = Find(name);
  return a == nullptr ? fallback : a->i;
}

float NodeContext::Float(std::string_view name, float fallback) const {
  const auto* a = Find(name);
  return a == nullptr ? fallback : a->f;
}

std::string NodeContext::String(std::string_view name, std::string fallback) const {
  const auto* a = Find(name);
  return a == nullptr ? fallback : a->s;
}

std::vector<std::int64_t> NodeContext::Ints(std::string_view name) const {
  const auto* a = Find(name);
  return a == nullptr ? std::vector<std::int64_t>{} : a->ints;
}

void NodeContext::Fail(const std::string& why) const {
  throw InputError("ONNX " + node_.op_type + " node '" + node_.name + "': " + why);
}

Kernel FindKernel(std::string_view op_type) {
  const auto& registry = Registry();
  auto it = registry.find(op_type);
  return it == registry.end() ? nullptr : it->second;
}

std::vector<std::string> KernelNames() {
  std::vector<std::string> names;
  for (const auto& [name, kernel] : Registry()) names.push_back(name);
  return names;
}

}  // namespace transeval::onnx::ops

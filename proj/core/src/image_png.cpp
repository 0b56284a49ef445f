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

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <algorithm>
#include <vector>
#include <string>

#include "transeval/error.hpp"
#include "transeval/image.hpp"

namespace transeval {
namespace {

struct PngErrorState {
  char message[256] = {0};
};

void OnPngError(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

void OnPngWarning(png_structp, png_const_charp) {}

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void ReadFromMemory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->size) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, reader->data + reader->offset, length);
  reader->offset += length;
}

// Only libpng calls happen between setjmp and the matching longjmp, so no
// C++ destructors are skipped. Every object touched after setjmp is owned by
// the caller.
struct PngReadBuffers {
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
};

bool DecodePngImpl(std::span<const std::uint8_t> bytes, Raster& out,
                   PngReadBuffers& buf, PngErrorState& err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           OnPngError, OnPngWarning);
  if (png == nullptr) {
    std::snprintf(err.message, sizeof(err.message), "png_create_read_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  MemoryReader reader{bytes.data(), bytes.size(), 0};

  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }

  png_set_read_fn(png, &reader, ReadFromMemory);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buf.pixels.resize(row_bytes * out.height);
  buf.rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) {
    buf.rows[y] = buf.pixels.data() + y * row_bytes;
  }
  png_read_image(png, buf.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return true;
}

void CopySamples(const PngReadBuffers& buf, Raster& out) {
  const std::size_t per_row = static_cast<std::size_t>(out.width) * out.channels;
  out.samples.resize(per_row * out.height);
  for (int y = 0; y < out.height; ++y) {
    std::uint16_t* dst = out.samples.data() + y * per_row;
    if (out.bit_depth == 16) {
      const std::uint8_t* src = buf.rows[y];
      for (std::size_t i = 0; i < per_row; ++i) {
        dst[i] = static_cast<std::uint16_t>((src[2 * i] << 8) | src[2 * i + 1]);
      }
    } else {
      std::copy(buf.rows[y], buf.rows[y] + per_row, dst);
    }
  }
}

struct PngWriteState {
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  std::FILE* file = nullptr;
};

bool EncodePngImpl(const Raster& raster, PngWriteState& state,
                   PngErrorState& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            OnPngError, OnPngWarning);
  if (png == nullptr) {
    std::snprintf(err.message, sizeof(err.message), "png_create_write_struct failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, state.file);
  const int color_type =
      raster.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, raster.width, raster.height, raster.bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, state.rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Raster DecodePng(std::span<const std::uint8_t> bytes) {
  Raster raster;
  PngReadBuffers buf;
  PngErrorState err;
  if (!DecodePngImpl(bytes, raster, buf, err)) {
    throw InputError(std::string("corrupt PNG: ") + err.message);
  }
  CopySamples(buf, raster);
  return raster;
}

void WritePng(const Raster& raster, const std::filesystem::path& path) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw InputError("PNG writer supports 1 or 3 channels");
  }
  if (raster.bit_depth != 8 && raster.bit_depth != 16) {
    throw InputError("PNG writer supports 8 or 16 bits");
  }
  const std::size_t per_row =
      static_cast<std::size_t>(raster.width) * raster.channels;
  if (raster.height <= 0 || raster.width <= 0 ||
      raster.samples.size() != per_row * raster.height) {
    throw InputError("raster sample count does not match its dimensions");
  }

  PngWriteState state;
  const std::size_t bytes_per_sample = raster.bit_depth == 16 ? 2 : 1;
  state.pixels.resize(per_row * raster.height * bytes_per_sample);
  state.rows.resize(raster.height);
  for (int y = 0; y < raster.height; ++y) {
    std::uint8_t* row = state.pixels.data() + y * per_row * bytes_per_sample;
    state.rows[y] = row;
    const std::uint16_t* src = raster.samples.data() + y * per_row;
    if (bytes_per_sample == 2) {
      for (std::size_t i = 0; i < per_row; ++i) {
        row[2 * i] = static_cast<std::uint8_t>(src[i] >> 8);
        row[2 * i + 1] = static_cast<std::uint8_t>(src[i] & 0xFF);
      }
    } else {
      for (std::size_t i = 0; i < per_row; ++i) {
        row[i] = static_cast<std::uint8_t>(std::min<std::uint16_t>(src[i], 255));
      }
    }
  }

  state.file = std::fopen(path.string().c_str(), "wb");
  if (state.file == nullptr) {
    throw InputError("cannot open " + path.string() + " for writing");
  }
  PngErrorState err;
  const bool ok = EncodePngImpl(raster, state, err);
  const bool closed = std::fclose(state.file) == 0;
  if (!ok || !closed) {
    throw Error("failed to write PNG " + path.string() + ": " +
                (ok ? std::string("close failed") : std::string(err.message)));
  }
}

}  // namespace transeval

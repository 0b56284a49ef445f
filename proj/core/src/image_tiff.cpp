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

// Minimal baseline TIFF reader: first IFD only, strip organization,
// unsigned 8/16-bit samples, compression none (1) or deflate (8, 32946),
// optional horizontal-differencing predictor, chunky or planar layout.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "transeval/error.hpp"
#include "transeval/image.hpp"

namespace transeval {
namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPlanarConfig = 284,
  kPredictor = 317,
  kTileWidth = 322,
  kSampleFormat = 339,
};

class TiffReader {
 public:
  explicit TiffReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    if (bytes.size() < 8) Fail("truncated header");
    little_ = bytes[0] == 'I';
  }

  std::uint16_t U16(std::size_t off) const {
    Need(off, 2);
    return little_ ? static_cast<std::uint16_t>(bytes_[off] | (bytes_[off + 1] << 8))
                   : static_cast<std::uint16_t>((bytes_[off] << 8) | bytes_[off + 1]);
  }

  std::uint32_t U32(std::size_t off) const {
    Need(off, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint32_t b = bytes_[off + (little_ ? 3 - i : i)];
      v = (v << 8) | b;
    }
    return v;
  }

  // Values of one IFD entry, widened to 32 bits.
  std::vector<std::uint32_t> Values(std::size_t entry) const {
    const std::uint16_t type = U16(entry + 2);
    const std::uint32_t count = U32(entry + 4);
    std::size_t width = 0;
    switch (type) {
      case 1:  // BYTE
        width = 1;
        break;
      case 3:  // SHORT
        width = 2;
        break;
      case 4:  // LONG
        width = 4;
        break;
      default:
        Fail("unsupported IFD field type " + std::to_string(type));
    }
    if (count > bytes_.size()) Fail("IFD entry count out of range");
    const std::size_t total = width * count;
    const std::size_t base = total <= 4 ? entry + 8 : U32(entry + 8);
    Need(base, total);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::size_t off = base + i * width;
      out[i] = width == 1 ? bytes_[off] : width == 2 ? U16(off) : U32(off);
    }
    return out;
  }

  void Need(std::size_t off, std::size_t len) const {
    if (off > bytes_.size() || len > bytes_.size() - off) {
      Fail("offset beyond end of file");
    }
  }

  bool little() const { return little_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  [[noreturn]] static void Fail(const std::string& why) {
    throw InputError("corrupt or unsupported TIFF: " + why);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool little_ = true;
};

std::vector<std::uint8_t> Inflate(std::span<const std::uint8_t> in,
                                  std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf out_len = static_cast<uLongf>(expected);
  const int rc = uncompress(out.data(), &out_len, in.data(),
                            static_cast<uLong>(in.size()));
  if (rc != Z_OK || out_len != expected) {
    TiffReader::Fail("deflate strip did not decode to " +
                     std::to_string(expected) + " bytes");
  }
  return out;
}

}  // namespace

Raster DecodeTiff(std::span<const std::uint8_t> bytes) {
  TiffReader r(bytes);
  const std::size_t ifd = r.U32(4);
  const std::uint16_t n_entries = r.U16(ifd);

  std::map<std::uint16_t, std::vector<std::uint32_t>> tags;
  for (std::uint16_t i = 0; i < n_entries; ++i) {
    const std::size_t entry = ifd + 2 + 12u * i;
    const std::uint16_t tag = r.U16(entry);
    switch (tag) {
      case kImageWidth: case kImageLength: case kBitsPerSample:
      case kCompression: case kPhotometric: case kStripOffsets:
      case kSamplesPerPixel: case kRowsPerStrip: case kStripByteCounts:
      case kPlanarConfig: case kPredictor: case kTileWidth: case kSampleFormat:
        tags[tag] = r.Values(entry);
        break;
      default:
        break;
    }
  }

  auto scalar = [&](Tag tag, std::uint32_t fallback) -> std::uint32_t {
    auto it = tags.find(tag);
    return it == tags.end() || it->second.empty() ? fallback : it->second[0];
  };
  auto required = [&](Tag tag) -> const std::vector<std::uint32_t>& {
    auto it = tags.find(tag);
    if (it == tags.end() || it->second.empty()) {
      TiffReader::Fail("missing tag " + std::to_string(tag));
    }
    return it->second;
  };

  if (tags.count(kTileWidth)) TiffReader::Fail("tiled layout is not supported");

  Raster out;
  out.width = static_cast<int>(required(kImageWidth)[0]);
  out.height = static_cast<int>(required(kImageLength)[0]);
  out.channels = static_cast<int>(scalar(kSamplesPerPixel, 1));
  if (out.width <= 0 || out.height <= 0 || out.channels <= 0) {
    TiffReader::Fail("non-positive dimensions");
  }
  const std::vector<std::uint32_t>& bits = required(kBitsPerSample);
  for (std::uint32_t b : bits) {
    if (b != bits[0]) TiffReader::Fail("mixed bit depths across samples");
  }
  if (bits[0] != 8 && bits[0] != 16) {
    TiffReader::Fail("bit depth " + std::to_string(bits[0]) + " (need 8 or 16)");
  }
  out.bit_depth = static_cast<int>(bits[0]);
  if (scalar(kSampleFormat, 1) != 1) {
    TiffReader::Fail("only unsigned integer samples are supported");
  }

  const std::uint32_t compression = scalar(kCompression, 1);
  if (compression != 1 && compression != 8 && compression != 32946) {
    TiffReader::Fail("compression scheme " + std::to_string(compression));
  }
  const std::uint32_t predictor = scalar(kPredictor, 1);
  if (predictor != 1 && predictor != 2) {
    TiffReader::Fail("predictor " + std::to_string(predictor));
  }
  const bool planar = scalar(kPlanarConfig, 1) == 2;
  const std::uint32_t rows_per_strip =
      std::min<std::uint32_t>(scalar(kRowsPerStrip, out.height), out.height);
  if (rows_per_strip == 0) TiffReader::Fail("RowsPerStrip is zero");

  const std::vector<std::uint32_t>& offsets = required(kStripOffsets);
  const std::vector<std::uint32_t>& counts = required(kStripByteCounts);
  if (offsets.size() != counts.size()) {
    TiffReader::Fail("strip offset/count length mismatch");
  }
  const std::size_t strips_per_plane =
      (out.height + rows_per_strip - 1) / rows_per_strip;
  const std::size_t planes = planar ? out.channels : 1;
  if (offsets.size() != strips_per_plane * planes) {
    TiffReader::Fail("expected " + std::to_string(strips_per_plane * planes) +
                     " strips, found " + std::to_string(offsets.size()));
  }

  const std::size_t bytes_per_sample = out.bit_depth / 8;
  const std::size_t samples_per_row =
      static_cast<std::size_t>(out.width) * (planar ? 1 : out.channels);
  out.samples.assign(static_cast<std::size_t>(out.width) * out.height * out.channels, 0);

  for (std::size_t plane = 0; plane < planes; ++plane) {
    for (std::size_t s = 0; s < strips_per_plane; ++s) {
      const std::size_t strip = plane * strips_per_plane + s;
      const std::size_t row0 = s * rows_per_strip;
      const std::size_t rows =
          std::min<std::size_t>(rows_per_strip, out.height - row0);
      const std::size_t expected = rows * samples_per_row * bytes_per_sample;
      r.Need(offsets[strip], counts[strip]);
      std::span<const std::uint8_t> raw =
          r.bytes().subspan(offsets[strip], counts[strip]);
      std::vector<std::uint8_t> decoded;
      if (compression == 1) {
        if (raw.size() < expected) TiffReader::Fail("short uncompressed strip");
        decoded.assign(raw.begin(), raw.begin() + expected);
      } else {
        decoded = Inflate(raw, expected);
      }

      for (std::size_t y = 0; y < rows; ++y) {
        std::vector<std::uint16_t> line(samples_per_row);
        const std::uint8_t* src = decoded.data() + y * samples_per_row * bytes_per_sample;
        for (std::size_t i = 0; i < samples_per_row; ++i) {
          if (bytes_per_sample == 1) {
            line[i] = src[i];
          } else {
            const std::uint8_t a = src[2 * i];
            const std::uint8_t b = src[2 * i + 1];
            line[i] = r.little() ? static_cast<std::uint16_t>(a | (b << 8))
                                 : static_cast<std::uint16_t>((a << 8) | b);
          }
        }
        if (predictor == 2) {
          const std::size_t stride = planar ? 1 : out.channels;
          for (std::size_t i = stride; i < samples_per_row; ++i) {
            line[i] = static_cast<std::uint16_t>(line[i] + line[i - stride]);
            if (bytes_per_sample == 1) line[i] &= 0xFF;
          }
        }
        const std::size_t out_row = (row0 + y) * out.width * out.channels;
        if (planar) {
          for (std::size_t x = 0; x < static_cast<std::size_t>(out.width); ++x) {
            out.samples[out_row + x * out.channels + plane] = line[x];
          }
        } else {
          std::copy(line.begin(), line.end(), out.samples.begin() + out_row);
        }
      }
    }
  }
  return out;
}

}  // namespace transeval

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

#include "transeval/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "transeval/error.hpp"

namespace transeval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void SchemaError(const std::string& field, const std::string& why) {
  throw InputError("manifest field '" + field + "': " + why);
}

std::string RequireString(const json& obj, const std::string& key,
                          const std::string& field) {
  auto it = obj.find(key);
  if (it == obj.end()) SchemaError(field, "missing");
  if (!it->is_string()) SchemaError(field, "expected string");
  const std::string value = it->get<std::string>();
  if (value.empty()) SchemaError(field, "empty path");
  return value;
}

fs::path ResolveDir(const fs::path& base, const std::string& raw,
                    const std::string& field) {
  fs::path p(raw);
  if (p.is_relative()) p = base / p;
  p = p.lexically_normal();
  std::error_code ec;
  if (!fs::is_directory(p, ec)) {
    SchemaError(field, "directory does not exist: " + p.string());
  }
  return p;
}

std::array<double, 3> ParseTriple(const json& value, const std::string& field) {
  if (!value.is_array() || value.size() != 3) {
    SchemaError(field, "expected array of 3 numbers");
  }
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!value[i].is_number()) SchemaError(field, "expected array of 3 numbers");
    out[i] = value[i].get<double>();
  }
  return out;
}

PreprocessSpec ParsePreprocess(const json& obj) {
  if (!obj.is_object()) SchemaError("preprocess", "expected object");
  PreprocessSpec spec;
  if (auto it = obj.find("size"); it != obj.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
        !(*it)[1].is_number_integer()) {
      SchemaError("preprocess.size", "expected [height, width] integers");
    }
    spec.target_height = (*it)[0].get<int>();
    spec.target_width = (*it)[1].get<int>();
  }
  if (auto it = obj.find("mean"); it != obj.end()) {
    spec.channel_mean = ParseTriple(*it, "preprocess.mean");
  }
  if (auto it = obj.find("std"); it != obj.end()) {
    spec.channel_std = ParseTriple(*it, "preprocess.std");
  }
  if (auto it = obj.find("filter"); it != obj.end()) {
    if (!it->is_string() || it->get<std::string>() != "bilinear") {
      SchemaError("preprocess.filter", "only \"bilinear\" is supported");
    }
  }
  try {
    spec.Validate();
  } catch (const InputError& e) {
    SchemaError("preprocess", e.what());
  }
  return spec;
}

bool IsImageFile(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

}  // namespace

void PreprocessSpec::Validate() const {
  if (target_height <= 0 || target_width <= 0) {
    throw InputError("target size must be positive, got " +
                     std::to_string(target_height) + "x" +
                     std::to_string(target_width));
  }
  for (int c = 0; c < 3; ++c) {
    if (!(channel_std[c] > 0.0) || !std::isfinite(channel_std[c])) {
      throw InputError("channel_std components must be positive");
    }
    if (!std::isfinite(channel_mean[c])) {
      throw InputError("channel_mean components must be finite");
    }
  }
}

DatasetManifest ParseManifest(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) SchemaError("<root>", "expected object");

  DatasetManifest manifest;
  if (auto it = doc.find("epochs"); it != doc.end()) {
    if (!it->is_array()) SchemaError("epochs", "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      const std::string field = "epochs[" + std::to_string(i) + "]";
      if (!e.is_object()) SchemaError(field, "expected object");
      auto idx = e.find("epoch");
      if (idx == e.end()) SchemaError(field + ".epoch", "missing");
      if (!idx->is_number_integer()) SchemaError(field + ".epoch", "expected integer");
      const std::int64_t epoch = idx->get<std::int64_t>();
      if (epoch < 0) SchemaError(field + ".epoch", "must be non-negative");
      if (!manifest.epochs.empty() && epoch <= manifest.epochs.back().epoch) {
        throw InputError("epoch indices not strictly increasing (" +
                         std::to_string(manifest.epochs.back().epoch) +
                         " followed by " + std::to_string(epoch) + ")");
      }
      manifest.epochs.push_back(
          {epoch, ResolveDir(base_dir, RequireString(e, "dir", field + ".dir"),
                             field + ".dir")});
    }
  }

  if (auto it = doc.find("pairs"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) SchemaError("pairs", "expected object");
    PairDirs pairs;
    pairs.original = ResolveDir(
        base_dir, RequireString(*it, "original", "pairs.original"), "pairs.original");
    pairs.transformed = ResolveDir(
        base_dir, RequireString(*it, "transformed", "pairs.transformed"),
        "pairs.transformed");
    pairs.reconstructed = ResolveDir(
        base_dir, RequireString(*it, "reconstructed", "pairs.reconstructed"),
        "pairs.reconstructed");
    manifest.pairs = std::move(pairs);
  }

  if (manifest.epochs.empty() && !manifest.pairs) {
    throw InputError("nothing to evaluate: manifest has neither epochs nor pairs");
  }

  if (doc.contains("real_dir") || !manifest.epochs.empty()) {
    manifest.real_dir =
        ResolveDir(base_dir, RequireString(doc, "real_dir", "real_dir"), "real_dir");
  }

  if (auto it = doc.find("preprocess"); it != doc.end()) {
    manifest.preprocess = ParsePreprocess(*it);
  }
  return manifest;
}

DatasetManifest LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return ParseManifest(buffer.str(), base);
}

ImageTile ResizeBilinear(const ImageTile& tile, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw InputError("resize target must be positive");
  }
  if (tile.height() == height && tile.width() == width) return tile;

  // Source coordinate of destination index i under half-pixel centers,
  // clamped to the valid sample range.
  auto source = [](int i, int in, int out, int& lo, int& hi, double& frac) {
    const double scale = static_cast<double>(in) / out;
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    lo = static_cast<int>(std::floor(s));
    hi = std::min(lo + 1, in - 1);
    frac = s - lo;
  };

  ImageTile out(height, width);
  for (int y = 0; y < height; ++y) {
    int y0, y1;
    double fy;
    source(y, tile.height(), height, y0, y1, fy);
    for (int x = 0; x < width; ++x) {
      int x0, x1;
      double fx;
      source(x, tile.width(), width, x0, x1, fx);
      for (int b = 0; b < ImageTile::kBands; ++b) {
        const double top = (1.0 - fx) * tile.at(y0, x0, b) + fx * tile.at(y0, x1, b);
        const double bottom = (1.0 - fx) * tile.at(y1, x0, b) + fx * tile.at(y1, x1, b);
        out.at(y, x, b) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

ImageTile Preprocess(const ImageTile& tile, const PreprocessSpec& spec) {
  spec.Validate();
  ImageTile out = ResizeBilinear(tile, spec.target_height, spec.target_width);
  std::span<float> data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = static_cast<int>(i % ImageTile::kBands);
    data[i] = static_cast<float>((data[i] - spec.channel_mean[c]) / spec.channel_std[c]);
  }
  return out;
}

std::vector<fs::path> ListImages(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) {
    throw InputError("cannot read directory " + dir.string() + ": " + ec.message());
  }
  for (const auto& entry : it) {
    if (entry.is_regular_file() && IsImageFile(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

std::vector<EpochImages> ScanEpochs(const DatasetManifest& manifest) {
  std::vector<EpochImages> out;
  out.reserve(manifest.epochs.size());
  for (const EpochDir& e : manifest.epochs) {
    EpochImages record{e.epoch, ListImages(e.dir)};
    if (record.images.empty()) {
      throw InputError("epoch " + std::to_string(e.epoch) + " contains no images (" +
                       e.dir.string() + ")");
    }
    out.push_back(std::move(record));
  }
  return out;
}

}  // namespace transeval

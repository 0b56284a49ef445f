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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "transeval/error.hpp"
#include "transeval/fixtures.hpp"
#include "transeval/image.hpp"
#include "transeval/ingest.hpp"
#include "transeval/parallel.hpp"
#include "transeval/rng.hpp"

namespace transeval::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersionTag = "transeval 0.1.0";

std::string ReadFileOr(const fs::path& path, std::string fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return fallback;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Stamp(const EmbedderSpec& spec, const PreprocessSpec& pre) {
  std::ostringstream os;
  os << spec.Describe() << " preprocess=" << pre.target_height << "x" << pre.target_width;
  os << " mean=" << FormatNumber(pre.channel_mean[0]) << "," << FormatNumber(pre.channel_mean[1]) << ","
     << FormatNumber(pre.channel_mean[2]);
  os << " std=" << FormatNumber(pre.channel_std[0]) << "," << FormatNumber(pre.channel_std[1]) << ","
     << FormatNumber(pre.channel_std[2]);
  return os.str();
}

FeatureMatrix EmbedImages(const Embedder& embedder, const std::vector<fs::path>& paths,
                          const PreprocessSpec& pre) {
  std::vector<ImageTile> tiles(paths.size());
  ParallelFor(paths.size(), [&](std::size_t i) {
    tiles[i] = Preprocess(LoadImage(paths[i]), pre);
  });
  FeatureMatrix embedded = embedder.Embed(tiles);
  std::vector<std::string> labels;
  for (const auto& p : paths) labels.push_back(p.filename().string());
  std::vector<float> data(embedded.data().begin(), embedded.data().end());
  return FeatureMatrix(embedded.rows(), embedded.cols(), std::move(data), std::move(labels));
}

struct EmbedJob {
  std::string name;
  fs::path cache;
  std::vector<fs::path> images;
};

std::vector<CacheEntry> EmbedSpace(const EmbedderSpec& spec, const DatasetManifest& manifest,
                                   const std::vector<EmbedJob>& jobs, const fs::path& dir,
                                   bool force, std::ostream& log) {
  fs::create_directories(dir);
  const std::string stamp = Stamp(spec, manifest.preprocess);
  const fs::path stamp_path = EmbedderStampPath(dir);
  const bool stale = ReadFileOr(stamp_path, "") != stamp + "\n";
  if (stale && fs::exists(stamp_path)) log << "embedder changed, re-embedding " << dir.string() << "\n";
  if (stale || force) fs::remove(stamp_path);

  std::unique_ptr<Embedder> embedder;
  std::vector<CacheEntry> entries;
  for (const EmbedJob& job : jobs) {
    CacheEntry entry{job.name, job.cache, 0, false};
    if (!force && !stale && fs::exists(job.cache)) {
      entry.rows = LoadFeatures(job.cache).rows();
      entry.cache_hit = true;
      log << "cache hit: " << job.name << " -> " << job.cache.string() << " (" << entry.rows
          << " rows)\n";
    } else {
      if (!embedder) embedder = MakeEmbedder(spec);
      const FeatureMatrix features = EmbedImages(*embedder, job.images, manifest.preprocess);
      SaveFeatures(features, job.cache);
      entry.rows = features.rows();
      log << "embedded " << job.name << ": " << entry.rows << " images -> "
          << job.cache.string() << "\n";
    }
    entries.push_back(std::move(entry));
  }
  WriteFileAtomic(stamp_path, stamp + "\n");
  return entries;
}

std::vector<EmbedJob> JobsFor(const DatasetManifest& manifest, const fs::path& dir) {
  std::vector<EmbedJob> jobs;
  const auto real = ListImages(manifest.real_dir);
  if (real.empty()) {
    throw InputError("real_dir contains no images (" + manifest.real_dir.string() + ")");
  }
  jobs.push_back({"real", RealCachePath(dir), real});
  for (const EpochImages& e : ScanEpochs(manifest)) {
    jobs.push_back({"epoch " + std::to_string(e.epoch), EpochCachePath(dir, e.epoch), e.images});
  }
  return jobs;
}

DatasetManifest LoadEpochManifest(const RunConfig& config) {
  DatasetManifest manifest = LoadManifest(config.manifest_path);
  if (manifest.epochs.empty()) {
    throw InputError("manifest '" + config.manifest_path.string() + "' lists no epochs");
  }
  return manifest;
}

// Caches for exactly the manifest epochs when a manifest is given, otherwise
// whatever the feature directory holds.
LoadedCaches CachesFor(const fs::path& dir,
                        const std::optional<DatasetManifest>& manifest) {
  if (!manifest) return LoadCaches(dir);
  LoadedCaches caches;
  caches.real = LoadFeatures(RealCachePath(dir));
  caches.embedder = ReadFileOr(EmbedderStampPath(dir), "");
  for (const EpochDir& e : manifest->epochs) {
    caches.epochs.push_back(e.epoch);
    caches.epoch_features.push_back(LoadFeatures(EpochCachePath(dir, e.epoch)));
  }
  return caches;
}

std::string TrimNewline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string EpochLabel(std::int64_t epoch) { return "epoch_" + std::to_string(epoch); }

// Random 16-bit RGB raster with samples in [0, max_q].
Raster RandomRaster(int size, std::uint64_t seed, std::uint32_t max_q) {
  Raster r;
  r.height = size;
  r.width = size;
  r.channels = 3;
  r.bit_depth = 16;
  r.samples.resize(static_cast<std::size_t>(size) * size * 3);
  rng::CounterStream stream(seed);
  for (auto& q : r.samples) q = static_cast<std::uint16_t>(stream.NextIndex(max_q + 1));
  return r;
}

std::uint32_t ToQ16(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(what) + " must lie in [0, 1]");
  return static_cast<std::uint32_t>(std::lround(v * 65535.0));
}

}  // namespace

ReportFormats ReportFormats::Parse(std::string_view list) {
  ReportFormats f;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string_view item = list.substr(start, comma - start);
    if (item == "csv") {
      f.csv = true;
    } else if (item == "json") {
      f.json = true;
    } else if (item == "svg") {
      f.svg = true;
    } else if (!item.empty()) {
      throw InputError("unknown report format '" + std::string(item) + "'");
    }
    start = comma + 1;
  }
  if (!f.any()) throw InputError("at least one report format is required");
  return f;
}

void RunConfig::Validate() const {
  if (output_dir.empty()) throw InputError("--out is required");
  embedder.Validate();
  if (fid_embedder) fid_embedder->Validate();
  cst.Validate();
  if (!report_formats.any()) throw InputError("at least one report format is required");
  if (k_pca < 1) throw InputError("k must be >= 1");
}

fs::path FeatureDir(const fs::path& out, bool fid) {
  return fid ? out / "features" / "fid" : out / "features";
}

fs::path RealCachePath(const fs::path& dir) { return dir / "real.feat"; }

fs::path EpochCachePath(const fs::path& dir, std::int64_t epoch) {
  char name[64];
  std::snprintf(name, sizeof name, "epoch_%06lld.feat", static_cast<long long>(epoch));
  return dir / name;
}

fs::path EmbedderStampPath(const fs::path& dir) { return dir / "embedder.txt"; }

void WriteFileAtomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<CacheEntry> CmdEmbed(const RunConfig& config, std::ostream& log) {
  config.Validate();
  if (config.manifest_path.empty()) throw InputError("--manifest is required");
  const DatasetManifest manifest = LoadEpochManifest(config);
  const fs::path dir = FeatureDir(config.output_dir);
  auto entries = EmbedSpace(config.embedder, manifest, JobsFor(manifest, dir), dir,
                            config.force, log);
  if (config.fid_embedder) {
    const fs::path fid_dir = FeatureDir(config.output_dir, true);
    auto fid_entries = EmbedSpace(*config.fid_embedder, manifest, JobsFor(manifest, fid_dir),
                                  fid_dir, config.force, log);
    entries.insert(entries.end(), fid_entries.begin(), fid_entries.end());
  }
  return entries;
}

LoadedCaches LoadCaches(const fs::path& dir) {
  const fs::path real = RealCachePath(dir);
  if (!fs::exists(real)) {
    throw InputError("missing feature cache '" + real.string() +
                     "'; run 'transeval embed' or pass --manifest");
  }
  LoadedCaches caches;
  caches.real = LoadFeatures(real);
  caches.embedder = ReadFileOr(EmbedderStampPath(dir), "");
  static const std::regex kEpochFile(R"(epoch_(\d+)\.feat)");
  std::vector<std::pair<std::int64_t, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, kEpochFile)) {
      found.emplace_back(std::stoll(m[1].str()), entry.path());
    }
  }
  std::sort(found.begin(), found.end());
  for (std::size_t i = 1; i < found.size(); ++i) {
    if (found[i].first == found[i - 1].first) {
      throw InputError("duplicate caches for epoch " + std::to_string(found[i].first));
    }
  }
  if (found.empty()) throw InputError("no epoch caches in '" + dir.string() + "'");
  for (const auto& [epoch, path] : found) {
    caches.epochs.push_back(epoch);
    caches.epoch_features.push_back(LoadFeatures(path));
  }
  return caches;
}

MetricSeries CmdReport(const RunConfig& config, std::ostream& log) {
  config.Validate();
  std::optional<DatasetManifest> manifest;
  if (!config.manifest_path.empty()) {
    CmdEmbed(config, log);
    manifest = LoadEpochManifest(config);
  } else if (config.fid_embedder) {
    throw InputError("--fid-model needs --manifest");
  }
  const LoadedCaches caches = CachesFor(FeatureDir(config.output_dir), manifest);

  std::optional<LoadedCaches> fid_caches;
  const fs::path fid_dir = FeatureDir(config.output_dir, true);
  if (config.fid_embedder || (!manifest && fs::exists(RealCachePath(fid_dir)))) {
    fid_caches = CachesFor(fid_dir, manifest);
    if (fid_caches->epochs != caches.epochs) {
      throw InputError("FID caches do not cover the same epochs as the feature caches");
    }
  }

  std::vector<EpochFeatures> epochs;
  for (std::size_t i = 0; i < caches.epochs.size(); ++i) {
    epochs.push_back({caches.epochs[i], &caches.epoch_features[i]});
  }
  FidInputs fid;
  if (fid_caches) {
    fid.real = &fid_caches->real;
    for (const auto& m : fid_caches->epoch_features) fid.epochs.push_back(&m);
  }
  const MetricSeries series =
      EpochSeries(caches.real, epochs, config.cst, fid_caches ? &fid : nullptr);

  std::vector<std::pair<std::string, std::string>> metadata = {
      {"generator", kVersionTag}, {"embedder", TrimNewline(caches.embedder)}};
  if (fid_caches) metadata.emplace_back("fid_embedder", TrimNewline(fid_caches->embedder));

  const fs::path& out = config.output_dir;
  if (config.report_formats.csv) {
    WriteFileAtomic(out / "report.csv", SeriesCsv(series));
    log << "wrote " << (out / "report.csv").string() << "\n";
  }
  if (config.report_formats.json) {
    WriteFileAtomic(out / "report.json", SeriesJson(series, metadata));
    log << "wrote " << (out / "report.json").string() << "\n";
  }
  if (config.report_formats.svg) {
    WriteFileAtomic(out / "report.svg", RenderSvg(series));
    log << "wrote " << (out / "report.svg").string() << "\n";
  }
  return series;
}

PairplotExport CmdPairplot(const RunConfig& config, std::span<const std::int64_t> epochs,
                           std::ostream& log) {
  config.Validate();
  if (epochs.empty()) throw InputError("--epochs must name at least one epoch");
  std::optional<DatasetManifest> manifest;
  if (!config.manifest_path.empty()) {
    manifest = LoadEpochManifest(config);
    for (std::int64_t e : epochs) {
      const bool known = std::any_of(manifest->epochs.begin(), manifest->epochs.end(),
                                     [&](const EpochDir& d) { return d.epoch == e; });
      if (!known) throw InputError("epoch " + std::to_string(e) + " is not in the manifest");
    }
    CmdEmbed(config, log);
  }
  const LoadedCaches caches = CachesFor(FeatureDir(config.output_dir), manifest);

  std::vector<PairplotGroup> groups;
  for (std::int64_t e : epochs) {
    const auto it = std::find(caches.epochs.begin(), caches.epochs.end(), e);
    if (it == caches.epochs.end()) {
      throw InputError("epoch " + std::to_string(e) + " has no feature cache");
    }
    groups.push_back({EpochLabel(e), &caches.epoch_features[static_cast<std::size_t>(
                                         it - caches.epochs.begin())]});
  }
  groups.push_back({"real", &caches.real});
  PairplotExport data = ExportPairplot(groups, config.k_pca);
  const fs::path csv = config.output_dir / "pairplot.csv";
  const fs::path json = config.output_dir / "pairplot_density.json";
  WriteFileAtomic(csv, PairplotCsv(data));
  WriteFileAtomic(json, PairplotDensityJson(data));
  log << "wrote " << csv.string() << "\n" << "wrote " << json.string() << "\n";
  return data;
}

L1Scale CmdBandL1(const fs::path& original, const fs::path& transformed, BandMode mode,
                  const fs::path& out_png, std::ostream& log) {
  if (out_png.empty()) throw InputError("--out is required");
  const ImageTile a = LoadImage(original);
  const ImageTile b = LoadImage(transformed);
  const L1Map map = BandL1Map(a, b, mode);
  if (out_png.has_parent_path()) fs::create_directories(out_png.parent_path());
  fs::path sidecar = out_png;
  sidecar.replace_extension(".json");
  const L1Scale scale = SaveL1Map(map, out_png, sidecar);
  log << "band " << BandModeName(mode) << ": min " << FormatNumber(scale.min) << " max "
      << FormatNumber(scale.max) << (scale.flat() ? " (flat)" : "") << "\n";
  log << "wrote " << out_png.string() << "\n" << "wrote " << sidecar.string() << "\n";
  return scale;
}

void CmdFixtures(const FixtureOptions& o, std::ostream& log) {
  if (o.out.empty()) throw InputError("--out is required");
  fs::create_directories(o.out);
  if (o.kind == "convergence") {
    const auto fx = fixtures::GenConvergenceFixture(o.dim, o.n, o.n_epochs, o.seed);
    const fs::path dir = FeatureDir(o.out);
    fs::create_directories(dir);
    SaveFeatures(fx.real, RealCachePath(dir));
    for (const auto& [epoch, features] : fx.epochs) SaveFeatures(features, EpochCachePath(dir, epoch));
    WriteFileAtomic(EmbedderStampPath(dir),
                    "fixture convergence dim=" + std::to_string(o.dim) + " n=" +
                        std::to_string(o.n) + " seed=" + std::to_string(o.seed) + "\n");
    log << "wrote convergence caches for " << fx.epochs.size() << " epochs to " << dir.string()
        << "\n";
  } else if (o.kind == "dataset") {
    if (o.images < 1 || o.n_epochs < 1 || o.size < 1) {
      throw InputError("dataset fixture needs images, epochs and size >= 1");
    }
    auto write_dir = [&](const std::string& name, std::uint64_t key, double amplitude) {
      const fs::path dir = o.out / name;
      fs::create_directories(dir);
      for (std::size_t i = 0; i < o.images; ++i) {
        ImageTile tile = fixtures::GenBaseTile(o.size, o.size, rng::Derive(key, i));
        if (amplitude > 0.0) tile = fixtures::GenGridImage(tile, std::max(2, o.period), amplitude);
        char file[32];
        std::snprintf(file, sizeof file, "img_%04zu.png", i);
        SavePng(tile, dir / file, 8);
      }
    };
    write_dir("real", rng::Derive(o.seed, 0), 0.0);
    std::string epochs_json;
    for (std::size_t t = 1; t <= o.n_epochs; ++t) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03zu", t);
      const double amp = o.amplitude * static_cast<double>(o.n_epochs - t) /
                         static_cast<double>(o.n_epochs);
      write_dir(name, rng::Derive(o.seed, t), amp);
      if (!epochs_json.empty()) epochs_json += ",\n    ";
      epochs_json += "{\"epoch\": " + std::to_string(t) + ", \"dir\": \"" + name + "\"}";
    }
    const std::string manifest = "{\n  \"real_dir\": \"real\",\n  \"epochs\": [\n    " +
                                 epochs_json + "\n  ],\n  \"preprocess\": {\"size\": [" +
                                 std::to_string(o.size) + ", " + std::to_string(o.size) +
                                 "]}\n}\n";
    WriteFileAtomic(o.out / "manifest.json", manifest);
    log << "wrote dataset with " << o.n_epochs << " epochs x " << o.images << " images to "
        << o.out.string() << "\n";
  } else if (o.kind == "shift") {
    if (o.band == BandMode::kAll) throw InputError("shift fixture needs a single band");
    const std::uint32_t q = ToQ16(o.shift, "shift");
    Raster base = RandomRaster(o.size, o.seed, 65535 - q);
    Raster shifted = base;
    const auto band = static_cast<std::size_t>(o.band);
    for (std::size_t i = band; i < shifted.samples.size(); i += 3) {
      shifted.samples[i] = static_cast<std::uint16_t>(shifted.samples[i] + q);
    }
    WritePng(base, o.out / "original.png");
    WritePng(shifted, o.out / "shifted.png");
    log << "wrote " << (o.out / "original.png").string() << " and "
        << (o.out / "shifted.png").string() << "\n";
  } else if (o.kind == "grid") {
    const std::uint32_t q = ToQ16(o.amplitude, "amplitude");
    if (o.period < 2) throw InputError("grid period must be >= 2");
    Raster base = RandomRaster(o.size, o.seed, 65535 - q);
    Raster grid = base;
    for (int y = 0; y < o.size; ++y) {
      for (int x = 0; x < o.size; ++x) {
        if (y % o.period != 0 && x % o.period != 0) continue;
        for (int b = 0; b < 3; ++b) {
          auto& s = grid.samples[(static_cast<std::size_t>(y) * o.size + x) * 3 + b];
          s = static_cast<std::uint16_t>(s + q);
        }
      }
    }
    WritePng(base, o.out / "original.png");
    WritePng(grid, o.out / "grid.png");
    log << "wrote " << (o.out / "original.png").string() << " and "
        << (o.out / "grid.png").string() << "\n";
  } else {
    throw InputError("unknown fixture kind '" + o.kind +
                     "', expected convergence, dataset, shift or grid");
  }
}

}  // namespace transeval::cli

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

#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "transeval/error.hpp"

namespace transeval::cli {
namespace {

struct EmbedFlags {
  std::string embedder;
  std::string model;
  std::string fid_model;
  std::size_t dim = 0;
  bool normalize = false;
};

struct CstFlags {
  std::size_t trees = 100;
  std::size_t repeats = 100;
  std::size_t folds = 2;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;
  std::string features_per_split = "sqrt";
};

void AddCommonFlags(CLI::App* cmd, RunConfig& config, EmbedFlags& e, std::uint64_t& seed,
                    bool manifest_required) {
  auto* m = cmd->add_option("--manifest", config.manifest_path, "dataset manifest JSON");
  if (manifest_required) m->required();
  cmd->add_option("--out", config.output_dir, "output directory")->required();
  cmd->add_option("--embedder", e.embedder, "model or projection")
      ->check(CLI::IsMember({"model", "projection"}));
  cmd->add_option("--model", e.model, "ONNX embedding model");
  cmd->add_option("--fid-model", e.fid_model, "second ONNX model for FID");
  cmd->add_option("--dim", e.dim, "embedding width (projection default 64)");
  cmd->add_flag("--normalize", e.normalize, "scale embeddings to unit length");
  cmd->add_option("--seed", seed, "master seed");
  cmd->add_flag("--force", config.force, "ignore existing feature caches");
}

void AddCstFlags(CLI::App* cmd, CstFlags& c) {
  cmd->add_option("--trees", c.trees, "trees per forest");
  cmd->add_option("--repeats", c.repeats, "cross-validation repeats");
  cmd->add_option("--folds", c.folds, "folds per repeat");
  cmd->add_option("--max-depth", c.max_depth, "tree depth limit, 0 for none");
  cmd->add_option("--min-leaf", c.min_leaf, "minimum samples per leaf");
  cmd->add_option("--features-per-split", c.features_per_split, "sqrt or a count");
}

EmbedderSpec ExternalSpec(const std::string& path, std::size_t dim, bool normalize) {
  EmbedderSpec spec;
  spec.kind = EmbedderKind::kExternalModel;
  spec.model_path = path;
  spec.output_dim = dim;
  spec.normalize_rows = normalize;
  return spec;
}

void Finish(RunConfig& config, const EmbedFlags& e, const CstFlags& c, std::uint64_t seed) {
  std::string kind = e.embedder;
  if (kind.empty()) kind = e.model.empty() ? "projection" : "model";
  if (kind == "model") {
    if (e.model.empty()) throw InputError("--embedder model requires --model");
    config.embedder = ExternalSpec(e.model, e.dim, e.normalize);
  } else {
    if (!e.model.empty()) throw InputError("--model conflicts with --embedder projection");
    config.embedder.kind = EmbedderKind::kSeededProjection;
    config.embedder.output_dim = e.dim == 0 ? 64 : e.dim;
    config.embedder.seed = seed;
    config.embedder.normalize_rows = e.normalize;
  }
  if (!e.fid_model.empty()) config.fid_embedder = ExternalSpec(e.fid_model, 0, false);

  config.cst.n_trees = c.trees;
  config.cst.n_repeats = c.repeats;
  config.cst.n_folds = c.folds;
  config.cst.min_leaf = c.min_leaf;
  config.cst.master_seed = seed;
  if (c.max_depth > 0) config.cst.max_depth = c.max_depth;
  if (c.features_per_split == "sqrt") {
    config.cst.features_per_split = cst::FeaturesPerSplit::SqrtD();
  } else {
    std::size_t k = 0;
    try {
      std::size_t used = 0;
      k = std::stoul(c.features_per_split, &used);
      if (used != c.features_per_split.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InputError("--features-per-split must be 'sqrt' or a positive integer");
    }
    config.cst.features_per_split = cst::FeaturesPerSplit::Fixed(k);
  }
}

std::string OneLine(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluation toolkit for unpaired image-to-image translation", "transeval"};
  app.set_version_flag("--version", "transeval 0.1.0");
  app.require_subcommand(1);

  RunConfig config;
  EmbedFlags embed_flags;
  CstFlags cst_flags;
  std::uint64_t seed = 0;
  std::string formats = "csv,json,svg";
  std::vector<std::int64_t> epochs;
  std::string band = "all";
  std::string original, transformed, out_png;
  FixtureOptions fx;
  std::string fx_band = "red";
  std::function<void()> action;

  auto* embed = app.add_subcommand("embed", "embed the real set and every epoch into feature caches");
  AddCommonFlags(embed, config, embed_flags, seed, true);
  embed->callback([&] {
    action = [&] {
      Finish(config, embed_flags, cst_flags, seed);
      CmdEmbed(config, out);
    };
  });

  auto* report = app.add_subcommand("report", "per-epoch FRD, CRD, FID and log loss series");
  AddCommonFlags(report, config, embed_flags, seed, false);
  AddCstFlags(report, cst_flags);
  report->add_option("--formats", formats, "comma-separated subset of csv,json,svg");
  report->callback([&] {
    action = [&] {
      Finish(config, embed_flags, cst_flags, seed);
      config.report_formats = ReportFormats::Parse(formats);
      CmdReport(config, out);
    };
  });

  auto* pairplot = app.add_subcommand("pairplot", "PCA pair-plot export for selected epochs");
  AddCommonFlags(pairplot, config, embed_flags, seed, false);
  pairplot->add_option("--epochs", epochs, "epochs to compare with the real set")
      ->delimiter(',')
      ->required();
  pairplot->add_option("--k", config.k_pca, "principal components");
  pairplot->callback([&] {
    action = [&] {
      Finish(config, embed_flags, cst_flags, seed);
      CmdPairplot(config, epochs, out);
    };
  });

  auto* band_l1 = app.add_subcommand("band-l1", "band-wise L1 difference map");
  band_l1->add_option("--original", original, "original image")->required();
  band_l1->add_option("--transformed", transformed, "translated image")->required();
  band_l1->add_option("--band", band, "red, green, blue or all");
  band_l1->add_option("--out", out_png, "output PNG; the scale goes to a .json sidecar")
      ->required();
  band_l1->callback([&] {
    action = [&] { CmdBandL1(original, transformed, ParseBandMode(band), out_png, out); };
  });

  auto* fixtures = app.add_subcommand("fixtures", "write synthetic fixtures");
  fixtures->add_option("--kind", fx.kind, "convergence, dataset, shift or grid")->required();
  fixtures->add_option("--out", fx.out, "output directory")->required();
  fixtures->add_option("--seed", fx.seed, "seed");
  fixtures->add_option("--dim", fx.dim, "feature dimension (convergence)");
  fixtures->add_option("--n", fx.n, "samples per set (convergence)");
  fixtures->add_option("--n-epochs", fx.n_epochs, "epoch count (convergence, dataset)");
  fixtures->add_option("--images", fx.images, "images per directory (dataset)");
  fixtures->add_option("--size", fx.size, "tile edge in pixels");
  fixtures->add_option("--period", fx.period, "lattice period (grid, dataset)");
  fixtures->add_option("--amplitude", fx.amplitude, "lattice amplitude (grid, dataset)");
  fixtures->add_option("--shift", fx.shift, "band offset (shift)");
  fixtures->add_option("--band", fx_band, "shifted band (shift)");
  fixtures->callback([&] {
    action = [&] {
      fx.band = ParseBandMode(fx_band);
      CmdFixtures(fx, out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: usage: " << OneLine(e.what()) << "\n";
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const InputError& e) {
    err << "error: input: " << OneLine(e.what()) << "\n";
    return 2;
  } catch (const ComputationError& e) {
    err << "error: computation: " << OneLine(e.what()) << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io: " << OneLine(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: internal: " << OneLine(e.what()) << "\n";
    return 1;
  }
}

}  // namespace transeval::cli

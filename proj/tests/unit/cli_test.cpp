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

// Drives the installed command-line binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "transeval/analysis.hpp"
#include "transeval/features.hpp"
#include "transeval/image.hpp"

namespace transeval {
namespace {

using testing::ReadAll;
using testing::TempDir;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Cli(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("cd '") + dir.path().string() + "' && '" +
                          TRANSEVAL_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = ReadAll(out);
  r.err = ReadAll(err);
  return r;
}

bool Contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

constexpr const char* kFast = " --trees 10 --repeats 2";

TEST(Cli, HelpAndVersion) {
  TempDir dir;
  EXPECT_EQ(Cli(dir, "--help").code, 0);
  const Result v = Cli(dir, "--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_TRUE(Contains(v.out, "0.1.0"));
}

TEST(Cli, UsageErrors) {
  TempDir dir;
  const Result none = Cli(dir, "");
  EXPECT_EQ(none.code, 2);
  EXPECT_TRUE(Contains(none.err, "error: usage:"));
  EXPECT_EQ(Cli(dir, "report").code, 2);
  EXPECT_EQ(Cli(dir, "report --out x --frobnicate").code, 2);
}

TEST(Cli, EmbedCachesAndReuses) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind dataset --out ds --images 5 --n-epochs 2 --size 16").code,
            0);
  const Result first = Cli(dir, "embed --manifest ds/manifest.json --out run");
  ASSERT_EQ(first.code, 0) << first.err;
  for (const char* name : {"real.feat", "epoch_000001.feat", "epoch_000002.feat"}) {
    const FeatureMatrix f = LoadFeatures(dir / (std::string("run/features/") + name));
    EXPECT_EQ(f.rows(), 5u);
    EXPECT_EQ(f.cols(), 64u);
  }
  EXPECT_FALSE(Contains(first.out + first.err, "cache hit"));
  const Result second = Cli(dir, "embed --manifest ds/manifest.json --out run");
  ASSERT_EQ(second.code, 0);
  EXPECT_TRUE(Contains(second.out + second.err, "cache hit: real"));
  EXPECT_TRUE(Contains(second.out + second.err, "cache hit: epoch 2"));
  const Result changed = Cli(dir, "embed --manifest ds/manifest.json --out run --dim 8");
  ASSERT_EQ(changed.code, 0);
  EXPECT_FALSE(Contains(changed.out + changed.err, "cache hit"));
  EXPECT_EQ(LoadFeatures(dir / "run/features/real.feat").cols(), 8u);
}

TEST(Cli, EmbedWithOnnxModel) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind dataset --out ds --images 3 --n-epochs 1 --size 16").code,
            0);
  const Result r = Cli(dir, "embed --manifest ds/manifest.json --out run --model '" +
                                testing::DataPath("onnx/conv_block.onnx").string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(LoadFeatures(dir / "run/features/epoch_000001.feat").cols(), 6u);
}

TEST(Cli, MissingModelIsInputError) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind dataset --out ds --images 2 --n-epochs 1 --size 8").code, 0);
  const Result r = Cli(dir, "embed --manifest ds/manifest.json --out run --model /missing/m.onnx");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(Contains(r.err, "error: input:"));
  EXPECT_TRUE(Contains(r.err, "/missing/m.onnx"));
}

TEST(Cli, MissingManifestIsInputError) {
  TempDir dir;
  const Result r = Cli(dir, "embed --manifest nope.json --out run");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(Contains(r.err, "nope.json"));
}

TEST(Cli, ReportIsByteDeterministic) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind dataset --out ds --images 6 --n-epochs 3 --size 16").code,
            0);
  ASSERT_EQ(Cli(dir, std::string("report --manifest ds/manifest.json --out a") + kFast).code, 0);
  ASSERT_EQ(Cli(dir, std::string("report --manifest ds/manifest.json --out b") + kFast).code, 0);
  for (const char* name : {"report.csv", "report.json", "report.svg"}) {
    const std::string a = ReadAll(dir / (std::string("a/") + name));
    EXPECT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, ReadAll(dir / (std::string("b/") + name))) << name;
  }
  const auto j = nlohmann::json::parse(ReadAll(dir / "a/report.json"));
  EXPECT_EQ(j["records"].size(), 3u);
  EXPECT_TRUE(j.contains("trend"));
  EXPECT_EQ(j["cst_params"]["n_trees"], 10);
}

TEST(Cli, ReportFromCachesMatchesManifestRun) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind convergence --out cv --dim 6 --n 40 --n-epochs 4").code, 0);
  const Result r = Cli(dir, std::string("report --out cv --formats csv,json") + kFast);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(std::filesystem::exists(dir / "cv/report.svg"));
  const auto j = nlohmann::json::parse(ReadAll(dir / "cv/report.json"));
  EXPECT_EQ(j["trend"]["frd"], -1.0);
  EXPECT_EQ(j["trend"]["crd_distance"], -1.0);
}

TEST(Cli, SingleEpochReportHasNoTrend) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind dataset --out ds --images 4 --n-epochs 1 --size 8").code, 0);
  ASSERT_EQ(Cli(dir, std::string("report --manifest ds/manifest.json --out o") + kFast).code, 0);
  const auto j = nlohmann::json::parse(ReadAll(dir / "o/report.json"));
  EXPECT_EQ(j["records"].size(), 1u);
  EXPECT_FALSE(j.contains("trend"));
  const std::string csv = ReadAll(dir / "o/report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Cli, ReportWithoutCachesIsInputError) {
  TempDir dir;
  const Result r = Cli(dir, "report --out empty");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(Contains(r.err, "error: input:"));
}

TEST(Cli, InvalidForestParameters) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind convergence --out cv --dim 4 --n 10 --n-epochs 3").code, 0);
  EXPECT_EQ(Cli(dir, "report --out cv --trees 0").code, 2);
  EXPECT_EQ(Cli(dir, "report --out cv --folds 1").code, 2);
  EXPECT_EQ(Cli(dir, "report --out cv --features-per-split half").code, 2);
}

TEST(Cli, SvgIsSelfContained) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind convergence --out cv --dim 4 --n 20 --n-epochs 3").code, 0);
  ASSERT_EQ(Cli(dir, std::string("report --out cv --formats svg") + kFast).code, 0);
  const std::string svg = ReadAll(dir / "cv/report.svg");
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
  EXPECT_TRUE(Contains(svg, "</svg>"));
  EXPECT_FALSE(Contains(svg, "href"));
  EXPECT_FALSE(Contains(svg, "<script"));
  EXPECT_FALSE(Contains(svg, "http://") && !Contains(svg, "http://www.w3.org/2000/svg"));
  EXPECT_TRUE(Contains(svg, "FRD"));
}

TEST(Cli, Pairplot) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind convergence --out cv --dim 6 --n 30 --n-epochs 3").code, 0);
  const Result r = Cli(dir, "pairplot --out cv --epochs 1,3");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = ReadAll(dir / "cv/pairplot.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "group,pc1,pc2,pc3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 91);
  const auto j = nlohmann::json::parse(ReadAll(dir / "cv/pairplot_density.json"));
  ASSERT_EQ(j["groups"].size(), 3u);
  EXPECT_EQ(j["groups"][0]["label"], "epoch_1");
  EXPECT_EQ(j["groups"][2]["label"], "real");
  EXPECT_EQ(j["groups"][1]["curves"].size(), 3u);

  const Result bad = Cli(dir, "pairplot --out cv --epochs 9");
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(Contains(bad.err, "epoch 9"));
}

TEST(Cli, BandL1IdenticalInputsAreFlat) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind shift --out sh --size 12 --shift 0.25 --band red").code, 0);
  const Result r =
      Cli(dir, "band-l1 --original sh/original.png --transformed sh/original.png --out z.png");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(ReadAll(dir / "z.json"));
  EXPECT_EQ(j["flat"], true);
  EXPECT_EQ(j["max"], 0.0);
  for (std::uint16_t q : ReadRaster(dir / "z.png").samples) EXPECT_EQ(q, 0);
}

TEST(Cli, BandL1RedShift) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind shift --out sh --size 12 --shift 0.25 --band red").code, 0);
  ASSERT_EQ(Cli(dir, "band-l1 --original sh/original.png --transformed sh/shifted.png "
                     "--band red --out red.png")
                .code,
            0);
  const L1Map red = LoadL1Map(dir / "red.png", dir / "red.json");
  // 16-bit quantization of each input keeps the difference within 1e-5 of the shift.
  EXPECT_NEAR(red.min(), 0.25, 1e-5);
  EXPECT_NEAR(red.max(), 0.25, 1e-5);
  ASSERT_EQ(Cli(dir, "band-l1 --original sh/original.png --transformed sh/shifted.png "
                     "--band green --out green.png")
                .code,
            0);
  EXPECT_EQ(nlohmann::json::parse(ReadAll(dir / "green.json"))["flat"], true);
  EXPECT_EQ(Cli(dir, "band-l1 --original sh/original.png --transformed sh/shifted.png "
                     "--band alpha --out x.png")
                .code,
            2);
}

TEST(Cli, BandL1GridLattice) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind grid --out gr --size 32 --period 8 --amplitude 0.3").code,
            0);
  ASSERT_EQ(Cli(dir, "band-l1 --original gr/original.png --transformed gr/grid.png --band all "
                     "--out g.png")
                .code,
            0);
  const Raster q = ReadRaster(dir / "g.png");
  ASSERT_EQ(q.channels, 1);
  ASSERT_EQ(q.bit_depth, 16);
  int lit = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const bool on_lattice = y % 8 == 0 || x % 8 == 0;
      const std::uint16_t v = q.samples[static_cast<std::size_t>(y) * 32 + x];
      if (on_lattice) {
        EXPECT_GT(v, 60000) << y << "," << x;
      } else {
        EXPECT_EQ(v, 0) << y << "," << x;
      }
      lit += v > 0;
    }
  EXPECT_EQ(lit, 32 * 32 * (2 * 8 - 1) / 64);
}

TEST(Cli, BandL1ShapeMismatch) {
  TempDir dir;
  ASSERT_EQ(Cli(dir, "fixtures --kind shift --out a --size 8").code, 0);
  ASSERT_EQ(Cli(dir, "fixtures --kind shift --out b --size 9").code, 0);
  const Result r =
      Cli(dir, "band-l1 --original a/original.png --transformed b/original.png --out m.png");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(Contains(r.err, "shape mismatch"));
}

}  // namespace
}  // namespace transeval

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

#include <benchmark/benchmark.h>

#include <vector>

#include "transeval/embed.hpp"
#include "transeval/fixtures.hpp"

namespace {

void BM_ProjectionEmbed(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::vector<transeval::ImageTile> tiles;
  for (std::uint64_t i = 0; i < 8; ++i) tiles.push_back(transeval::fixtures::GenBaseTile(size, size, i));
  transeval::EmbedderSpec spec;
  spec.kind = transeval::EmbedderKind::kSeededProjection;
  spec.output_dim = static_cast<std::size_t>(state.range(1));
  spec.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(transeval::EmbedBatch(tiles, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tiles.size()));
}
BENCHMARK(BM_ProjectionEmbed)->Args({32, 64})->Args({64, 256})->Unit(benchmark::kMillisecond);

}  // namespace

/* Copyright 2026 The tokscale Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "tokscale/dataset_prune.hpp"
#include "tokscale/quant_sim.hpp"
#include "tokscale/reference.hpp"
#include "tokscale/tensor.hpp"
#include "tokscale/token_compress.hpp"

namespace {

using namespace tokscale;

FeatureMap random_map(std::size_t h, std::size_t w, std::size_t c) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(h * w * c);
  for (auto& x : v) x = u(eng);
  return FeatureMap(h, w, c, std::move(v));
}

void BM_Bilinear(benchmark::State& st) {
  const FeatureMap m = random_map(448, 448, 3);
  for (auto _ : st) benchmark::DoNotOptimize(interpolate_bilinear(m, 1344, 1792));
}
void BM_BilinearReference(benchmark::State& st) {
  const FeatureMap m = random_map(448, 448, 3);
  for (auto _ : st) benchmark::DoNotOptimize(reference::interpolate_bilinear(m, 1344, 1792));
}

void BM_BlockAverage(benchmark::State& st) {
  const FeatureMap m = random_map(1344, 1792, 3);
  for (auto _ : st) benchmark::DoNotOptimize(block_average(m, 14, 14));
}
void BM_BlockAverageReference(benchmark::State& st) {
  const FeatureMap m = random_map(1344, 1792, 3);
  for (auto _ : st) benchmark::DoNotOptimize(reference::block_average(m, 14, 14));
}

void BM_Stc(benchmark::State& st) {
  const TokenGrid g(random_map(96, 128, 1152));
  for (auto _ : st) benchmark::DoNotOptimize(stc_reshape(g, 2));
}
void BM_StcReference(benchmark::State& st) {
  const TokenGrid g(random_map(96, 128, 1152));
  for (auto _ : st) benchmark::DoNotOptimize(reference::stc_reshape(g, 2));
}

VideoTokenTensor video() {
  std::vector<TokenGrid> frames;
  for (int f = 0; f < 64; ++f) frames.emplace_back(random_map(16, 16, 256), Provenance::kVideoFrame);
  return VideoTokenTensor(std::move(frames));
}
void BM_TemporalPool(benchmark::State& st) {
  const VideoTokenTensor v = video();
  for (auto _ : st) benchmark::DoNotOptimize(temporal_pool(v, 8));
}
void BM_TemporalPoolReference(benchmark::State& st) {
  const VideoTokenTensor v = video();
  for (auto _ : st) benchmark::DoNotOptimize(reference::temporal_pool(v, 8));
}

std::vector<SampleRecord> records() {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  std::vector<SampleRecord> out(100000);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = std::to_string(i);
    out[i].subset = "s";
    out[i].logp_small.resize(16);
    out[i].logp_large.resize(16);
    for (auto& x : out[i].logp_small) x = u(eng);
    for (auto& x : out[i].logp_large) x = u(eng);
  }
  return out;
}
void BM_DeltaScores(benchmark::State& st) {
  const auto r = records();
  for (auto _ : st) benchmark::DoNotOptimize(delta_scores(r));
}
void BM_DeltaScoresReference(benchmark::State& st) {
  const auto r = records();
  for (auto _ : st) benchmark::DoNotOptimize(reference::delta_scores(r));
}

std::vector<double> weights() {
  std::mt19937_64 eng(3);
  std::normal_distribution<double> n(0.0, 0.02);
  std::vector<double> w(1024 * 4096);
  for (auto& x : w) x = n(eng);
  return w;
}
void BM_QuantizeInt4(benchmark::State& st) {
  const auto w = weights();
  const std::size_t shape[] = {1024, 4096};
  for (auto _ : st) benchmark::DoNotOptimize(quantize(w, shape, QuantSpec::int4_group(128)));
}
void BM_QuantizeInt4Reference(benchmark::State& st) {
  const auto w = weights();
  const std::size_t shape[] = {1024, 4096};
  for (auto _ : st) {
    benchmark::DoNotOptimize(reference::quantize(w, shape, QuantSpec::int4_group(128)));
  }
}

}  // namespace

BENCHMARK(BM_Bilinear)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BilinearReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlockAverage)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlockAverageReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stc)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StcReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TemporalPool)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TemporalPoolReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeltaScores)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeltaScoresReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuantizeInt4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuantizeInt4Reference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

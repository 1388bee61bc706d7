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

// The OpenMP kernels must agree bitwise with the serial reference.

#include <omp.h>

#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tokscale/reference.hpp"

using namespace tokscale;
using tokscale::testing::Gen;
using tokscale::testing::random_map;

namespace {

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("bilinear and block average") {
  Gen g(1);
  for (int threads : {1, 3}) {
    Threads t(threads);
    for (int trial = 0; trial < 30; ++trial) {
      const FeatureMap m = random_map(g, g.integer(1, 40), g.integer(1, 40), g.integer(1, 4));
      const std::size_t oh = g.integer(1, 60), ow = g.integer(1, 60);
      CHECK(interpolate_bilinear(m, oh, ow) == reference::interpolate_bilinear(m, oh, ow));
      const FeatureMap b = random_map(g, 6 * g.integer(1, 5), 4 * g.integer(1, 5), 2);
      CHECK(block_average(b, 6, 4) == reference::block_average(b, 6, 4));
      CHECK(block_average(b, 2, 2) == reference::block_average(b, 2, 2));
    }
  }
}

TEST_CASE("stc and temporal pooling") {
  Gen g(2);
  for (int threads : {1, 3}) {
    Threads t(threads);
    for (std::size_t k = 1; k <= 5; ++k) {
      const TokenGrid grid(random_map(g, g.integer(1, 30), g.integer(1, 30), g.integer(1, 3)));
      CHECK(stc_reshape(grid, k) == reference::stc_reshape(grid, k));
    }
    for (std::size_t ratio : {1, 2, 3, 7}) {
      std::vector<TokenGrid> frames;
      for (int f = 0; f < 10; ++f) frames.emplace_back(random_map(g, 5, 6, 2), Provenance::kVideoFrame);
      const VideoTokenTensor v(std::move(frames));
      const VideoTokenTensor a = temporal_pool(v, ratio);
      const VideoTokenTensor b = reference::temporal_pool(v, ratio);
      REQUIRE(a.frames() == b.frames());
      for (std::size_t f = 0; f < a.frames(); ++f) CHECK(a.frame(f) == b.frame(f));
    }
  }
}

TEST_CASE("delta scores") {
  Gen g(3);
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 300; ++i) {
    SampleRecord r;
    r.id = std::to_string(i);
    r.subset = "s";
    for (std::size_t t = 0; t < g.integer(1, 9); ++t) {
      r.logp_small.push_back(-g.real(0, 3));
      r.logp_large.push_back(-g.real(0, 3));
    }
    recs.push_back(std::move(r));
  }
  Threads t(3);
  CHECK(delta_scores(recs) == reference::delta_scores(recs));
  CHECK(delta_scores(recs, Aggregation::kSum) == reference::delta_scores(recs, Aggregation::kSum));
}

TEST_CASE("quantize") {
  Gen g(4);
  std::vector<double> v(16 * 96);
  for (auto& x : v) x = g.real(-5, 5);
  const std::size_t shape[] = {16, 96};
  Threads t(3);
  for (const QuantSpec& s : {QuantSpec::int8_per_tensor(), QuantSpec::int8_per_channel(),
                             QuantSpec::int4_group(32), QuantSpec::int4_group(40, true),
                             QuantSpec::fp8_e4m3()}) {
    const QuantizedTensor a = quantize(v, shape, s);
    const QuantizedTensor b = reference::quantize(v, shape, s);
    CHECK(a.codes == b.codes);
    CHECK(a.scales == b.scales);
  }
}

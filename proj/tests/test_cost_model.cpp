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

#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tokscale/cost_model.hpp"
#include "tokscale/error.hpp"
#include "tokscale/token_compress.hpp"

using namespace tokscale;

namespace {

ModelShape toy() {
  ModelShape s;
  s.layers = 4;
  s.hidden = 256;
  s.heads = 4;
  s.kv_heads = 2;
  s.intermediate = 1024;
  s.vocab = 1000;
  return s;
}

struct Row {
  std::uint64_t rows, cols, copies;
};

// Spreadsheet-style listing of every weight matrix of the toy shape.
std::vector<Row> toy_sheet() {
  const std::uint64_t h = 256, kv = 2 * 64, f = 1024;
  std::vector<Row> sheet;
  for (int layer = 0; layer < 4; ++layer) {
    sheet.push_back({h, h, 1});   // q
    sheet.push_back({kv, h, 1});  // k
    sheet.push_back({kv, h, 1});  // v
    sheet.push_back({h, h, 1});   // o
    sheet.push_back({f, h, 1});   // gate
    sheet.push_back({f, h, 1});   // up
    sheet.push_back({h, f, 1});   // down
  }
  sheet.push_back({1000, h, 1});  // lm head
  return sheet;
}

}  // namespace

TEST_CASE("shape validation") {
  ModelShape s = toy();
  CHECK_NOTHROW(s.validate());
  s.heads = 3;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = toy();
  s.kv_heads = 3;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = toy();
  s.layers = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  CHECK(toy().head_dim() == 64);
  CHECK(toy().kv_dim() == 128);
}

TEST_CASE("attention is exactly quadratic") {
  const ModelShape s;
  for (std::uint64_t n = 1; n <= 4096; ++n) {
    CHECK(prefill_cost(2 * n, s).prefill_attention_flops ==
          4 * prefill_cost(n, s).prefill_attention_flops);
  }
  CHECK(prefill_cost(1, s).prefill_attention_flops == 4 * s.layers * s.hidden);
  CHECK_THROWS_AS(prefill_cost(0, s), InvalidArgument);
}

TEST_CASE("prefill is monotone and linear in the linear term") {
  const ModelShape s = toy();
  for (std::uint64_t n = 1; n < 300; ++n) {
    const CostReport a = prefill_cost(n, s), b = prefill_cost(n + 1, s);
    CHECK(b.prefill_attention_flops > a.prefill_attention_flops);
    CHECK(b.prefill_linear_flops - a.prefill_linear_flops ==
          prefill_cost(1, s).prefill_linear_flops);
  }
  std::uint64_t per_layer = 0;
  for (const Row& r : toy_sheet()) {
    if (r.rows != 1000) per_layer += r.rows * r.cols;
  }
  CHECK(prefill_cost(10, s).prefill_linear_flops == 2 * 10 * per_layer);
  ModelShape enc = s;
  enc.encoder_flops_per_tile = 1000;
  CHECK(prefill_cost(10, enc, 7).encoder_flops == 7000);
}

TEST_CASE("scale versus scale-then-compress") {
  const ModelShape s;
  const CostReport scale = prefill_cost(12 * 256, s);
  const CostReport compress = prefill_cost(12 * 121, s);
  const double tokens = 3072.0 / 1452.0;
  const double attn = static_cast<double>(scale.prefill_attention_flops) /
                      static_cast<double>(compress.prefill_attention_flops);
  CHECK(tokens == doctest::Approx(2.116).epsilon(1e-3));
  CHECK(attn == doctest::Approx(tokens * tokens).epsilon(1e-12));
  CHECK(static_cast<long>(std::lround(attn * 100)) == 448);
}

TEST_CASE("decode bytes match the enumeration oracle") {
  const ModelShape s = toy();
  std::uint64_t weights = 0, fp16 = 0, int4 = 0, int4_scales = 0, int8 = 0;
  for (const Row& r : toy_sheet()) {
    const std::uint64_t n = r.rows * r.cols * r.copies;
    weights += n;
    fp16 += 2 * 8 * n;
    int4 += 4 * n;
    int4_scales += r.rows * ((r.cols + 127) / 128) * 32;
    int8 += 8 * n + r.rows * 32;
  }
  const CostReport f = decode_cost(s, std::nullopt, 512);
  CHECK(f.weight_bits_per_token == fp16);
  CHECK(f.weight_bytes_per_token() == fp16 / 8.0);
  CHECK(f.decode_flops_per_token == 2 * weights + 4 * 4 * 512 * 256);
  CHECK(f.kv_cache_bytes == 2 * 4 * 512 * 128 * 2);

  const CostReport q4 = decode_cost(s, QuantSpec::int4_group(128), 512);
  CHECK(q4.weight_bits_per_token == int4 + int4_scales);
  const CostReport q4raw = decode_cost(s, QuantSpec::int4_group(128), 512, {false});
  CHECK(q4raw.weight_bits_per_token == int4);
  CHECK(decode_cost(s, QuantSpec::int8_per_channel(), 512).weight_bits_per_token == int8);
  CHECK(f.weight_format == "fp16");
  CHECK(q4.weight_format == "int4-group/per-group:128");
}

TEST_CASE("W4A16 ratios") {
  for (const ModelShape& s : {ModelShape{}, toy()}) {
    const auto fp16 = decode_cost(s, std::nullopt, 1).weight_bits_per_token;
    const auto raw = decode_cost(s, QuantSpec::int4_group(128), 1, {false}).weight_bits_per_token;
    const auto with = decode_cost(s, QuantSpec::int4_group(128), 1).weight_bits_per_token;
    CHECK(fp16 == 4 * raw);
    CHECK(with * 10000 == raw * 10625);  // +6.25%
  }
}

TEST_CASE("lower-bit formats never move more bytes") {
  for (const ModelShape& s : {ModelShape{}, toy()}) {
    const auto fp16 = decode_cost(s, std::nullopt, 64).weight_bits_per_token;
    const auto int8 = decode_cost(s, QuantSpec::int8_per_channel(), 64).weight_bits_per_token;
    const auto int8t = decode_cost(s, QuantSpec::int8_per_tensor(), 64).weight_bits_per_token;
    const auto fp8 = decode_cost(s, QuantSpec::fp8_e4m3(), 64).weight_bits_per_token;
    CHECK(int8 <= fp16);
    CHECK(int8t <= fp16);
    CHECK(fp8 <= fp16);
    for (std::size_t g : {8, 16, 32, 64, 128, 256}) {
      const auto int4 = decode_cost(s, QuantSpec::int4_group(g, true), 64).weight_bits_per_token;
      CHECK(int4 <= int8);
      CHECK(int4 <= fp8);
    }
  }
}

TEST_CASE("decode grows with context only through attention and cache") {
  const ModelShape s = toy();
  const CostReport a = decode_cost(s, std::nullopt, 100), b = decode_cost(s, std::nullopt, 200);
  CHECK(b.kv_cache_bytes == 2 * a.kv_cache_bytes);
  CHECK(b.weight_bits_per_token == a.weight_bits_per_token);
  CHECK(b.decode_flops_per_token - a.decode_flops_per_token == 4 * 4 * 100 * 256);
}

TEST_CASE("full cost combines both stages") {
  const ModelShape s = toy();
  const CostReport r = full_cost(100, 3, s, QuantSpec::int4_group(128), 300);
  CHECK(r.prefill_attention_flops == prefill_cost(100, s).prefill_attention_flops);
  CHECK(r.kv_cache_bytes == decode_cost(s, std::nullopt, 300).kv_cache_bytes);
  CHECK(r.context == 300);
  CHECK(r == full_cost(100, 3, s, QuantSpec::int4_group(128), 300));
}

TEST_CASE("video budget") {
  CHECK(video_budget(8, 1, 16) == 2048);
  CHECK(video_budget(32, 1, 16) == 8192);
  CHECK(video_budget(32, 4, 16) == 2048);
  CHECK(video_budget(256, 8, 16) == 8192);
  CHECK(video_budget(5, 2, 3) == 27);
  CHECK_THROWS_AS(video_budget(0, 1, 16), InvalidArgument);
  CHECK_THROWS_AS(video_budget(8, 0, 16), InvalidArgument);
}

TEST_CASE("video budget agrees with temporal pooling") {
  tokscale::testing::Gen g(1);
  for (std::size_t frames : {1, 5, 8, 32}) {
    for (std::size_t ratio : {1, 2, 3, 4, 8}) {
      std::vector<TokenGrid> f;
      for (std::size_t i = 0; i < frames; ++i) {
        f.emplace_back(tokscale::testing::random_map(g, 16, 16, 1), Provenance::kVideoFrame);
      }
      const VideoTokenTensor p = temporal_pool(VideoTokenTensor(std::move(f)), ratio);
      CHECK(p.token_count() == video_budget(frames, ratio, 16));
    }
  }
}

TEST_CASE("overflow is reported") {
  ModelShape s;
  s.hidden = std::uint64_t{1} << 40;
  s.heads = 1;
  s.kv_heads = 1;
  CHECK_THROWS_AS(prefill_cost(1u << 20, s), InvalidArgument);
}

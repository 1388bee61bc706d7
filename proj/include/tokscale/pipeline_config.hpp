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

// One JSON document configuring every stage of the pipeline. Every key is
// optional; absent keys keep their defaults. Unknown keys and wrongly typed
// values raise ConfigError naming the dotted key path.
//
//   {
//     "s2": {"tile_side": 448, "scale_factors": [1, 2, 3],
//            "max_tiles_largest_scale": 12, "min_tiles_largest_scale": 1,
//            "feature_side": 32},
//     "stc_k": 3,
//     "temporal_pool_ratio": 1,
//     "encoder": {"kind": "toy-patch", "channels": 8, "seed": 0},
//     "quant": {"format": "int8", "granularity": "per-channel",
//               "group_size": 128, "allow_ragged": false},
//     "model": {"layers": 28, "hidden": 3584, "heads": 28, "kv_heads": 4,
//               "intermediate": 18944, "vocab": 152064,
//               "encoder_flops_per_tile": 0}
//   }

#ifndef TOKSCALE_PIPELINE_CONFIG_HPP_
#define TOKSCALE_PIPELINE_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "tokscale/cost_model.hpp"
#include "tokscale/quant_sim.hpp"
#include "tokscale/s2_tiling.hpp"

namespace tokscale {

struct EncoderConfig {
  std::string kind = "toy-patch";
  std::size_t channels = 8;
  std::optional<std::uint64_t> seed;
};

struct PipelineConfig {
  S2Config s2;
  std::size_t stc_k = 3;
  std::size_t temporal_pool_ratio = 1;
  EncoderConfig encoder;
  QuantSpec quant = QuantSpec::int8_per_channel();
  ModelShape model;

  // Throws ConfigError when any component invariant is broken.
  void validate() const;
};

PipelineConfig parse_pipeline_config(const nlohmann::json& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace tokscale

#endif  // TOKSCALE_PIPELINE_CONFIG_HPP_

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

#include "tokscale/pipeline_config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>
#include <type_traits>

#include "tokscale/error.hpp"

namespace tokscale {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError("config key '" + (path.empty() ? "<root>" : path) +
                      "' must be an object");
  }
}

void reject_unknown(const json& j, const std::string& prefix,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key '" + join(prefix, key) + "'");
  }
}

template <typename T>
void read(const json& j, const std::string& prefix, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_unsigned()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    out = v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + join(prefix, key) + "' has the wrong type");
  }
}

template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw ConfigError("config key '" + path + "': " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  checked("s2", [&] { s2.validate(); });
  checked("model", [&] { model.validate(); });
  if (stc_k == 0) throw ConfigError("config key 'stc_k' must be positive");
  if (temporal_pool_ratio == 0) {
    throw ConfigError("config key 'temporal_pool_ratio' must be positive");
  }
  if (encoder.kind != "toy-patch") {
    throw ConfigError("config key 'encoder.kind': unknown encoder '" + encoder.kind + "'");
  }
  if (encoder.channels == 0) {
    throw ConfigError("config key 'encoder.channels' must be positive");
  }
  if (quant.granularity == Granularity::kPerGroup && quant.group_size == 0) {
    throw ConfigError("config key 'quant.group_size' must be positive");
  }
  if (quant.format == QuantFormat::kFp8E4M3 &&
      quant.granularity != Granularity::kPerTensor) {
    throw ConfigError("config key 'quant.granularity': fp8-e4m3 is per-tensor only");
  }
}

PipelineConfig parse_pipeline_config(const json& doc) {
  PipelineConfig cfg;
  expect_object(doc, "");
  reject_unknown(doc, "", {"s2", "stc_k", "temporal_pool_ratio", "encoder", "quant", "model"});

  if (doc.contains("s2")) {
    const json& s = doc.at("s2");
    expect_object(s, "s2");
    reject_unknown(s, "s2", {"tile_side", "scale_factors", "max_tiles_largest_scale",
                             "min_tiles_largest_scale", "feature_side"});
    read(s, "s2", "tile_side", cfg.s2.tile_side);
    read(s, "s2", "max_tiles_largest_scale", cfg.s2.max_tiles_largest_scale);
    read(s, "s2", "min_tiles_largest_scale", cfg.s2.min_tiles_largest_scale);
    read(s, "s2", "feature_side", cfg.s2.feature_side);
    if (s.contains("scale_factors")) {
      const json& f = s.at("scale_factors");
      bool ok = f.is_array();
      for (const auto& e : f) ok = ok && e.is_number_unsigned();
      if (!ok) throw ConfigError("config key 's2.scale_factors' has the wrong type");
      cfg.s2.scale_factors = f.get<std::vector<std::size_t>>();
    }
  }
  read(doc, "", "stc_k", cfg.stc_k);
  read(doc, "", "temporal_pool_ratio", cfg.temporal_pool_ratio);

  if (doc.contains("encoder")) {
    const json& e = doc.at("encoder");
    expect_object(e, "encoder");
    reject_unknown(e, "encoder", {"kind", "channels", "seed"});
    read(e, "encoder", "kind", cfg.encoder.kind);
    read(e, "encoder", "channels", cfg.encoder.channels);
    if (e.contains("seed")) {
      std::uint64_t seed = 0;
      read(e, "encoder", "seed", seed);
      cfg.encoder.seed = seed;
    }
  }

  if (doc.contains("quant")) {
    const json& q = doc.at("quant");
    expect_object(q, "quant");
    reject_unknown(q, "quant", {"format", "granularity", "group_size", "allow_ragged"});
    std::string format = to_string(cfg.quant.format);
    std::string granularity;
    read(q, "quant", "format", format);
    read(q, "quant", "granularity", granularity);
    checked("quant.format", [&] { cfg.quant.format = parse_quant_format(format); });
    if (granularity.empty()) {
      // Each format's natural granularity unless told otherwise.
      cfg.quant.granularity = cfg.quant.format == QuantFormat::kInt8Symmetric
                                  ? Granularity::kPerChannel
                              : cfg.quant.format == QuantFormat::kInt4Group
                                  ? Granularity::kPerGroup
                                  : Granularity::kPerTensor;
    } else {
      checked("quant.granularity",
              [&] { cfg.quant.granularity = parse_granularity(granularity); });
    }
    read(q, "quant", "group_size", cfg.quant.group_size);
    read(q, "quant", "allow_ragged", cfg.quant.allow_ragged);
  }

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    expect_object(m, "model");
    reject_unknown(m, "model", {"layers", "hidden", "heads", "kv_heads", "intermediate",
                                "vocab", "encoder_flops_per_tile"});
    read(m, "model", "layers", cfg.model.layers);
    read(m, "model", "hidden", cfg.model.hidden);
    read(m, "model", "heads", cfg.model.heads);
    read(m, "model", "kv_heads", cfg.model.kv_heads);
    read(m, "model", "intermediate", cfg.model.intermediate);
    read(m, "model", "vocab", cfg.model.vocab);
    read(m, "model", "encoder_flops_per_tile", cfg.model.encoder_flops_per_tile);
  }

  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_pipeline_config(doc);
}

json to_json(const PipelineConfig& cfg) {
  json encoder = {{"kind", cfg.encoder.kind}, {"channels", cfg.encoder.channels}};
  if (cfg.encoder.seed) encoder["seed"] = *cfg.encoder.seed;
  return {{"s2",
           {{"tile_side", cfg.s2.tile_side},
            {"scale_factors", cfg.s2.scale_factors},
            {"max_tiles_largest_scale", cfg.s2.max_tiles_largest_scale},
            {"min_tiles_largest_scale", cfg.s2.min_tiles_largest_scale},
            {"feature_side", cfg.s2.feature_side}}},
          {"stc_k", cfg.stc_k},
          {"temporal_pool_ratio", cfg.temporal_pool_ratio},
          {"encoder", encoder},
          {"quant",
           {{"format", to_string(cfg.quant.format)},
            {"granularity", to_string(cfg.quant.granularity)},
            {"group_size", cfg.quant.group_size},
            {"allow_ragged", cfg.quant.allow_ragged}}},
          {"model",
           {{"layers", cfg.model.layers},
            {"hidden", cfg.model.hidden},
            {"heads", cfg.model.heads},
            {"kv_heads", cfg.model.kv_heads},
            {"intermediate", cfg.model.intermediate},
            {"vocab", cfg.model.vocab},
            {"encoder_flops_per_tile", cfg.model.encoder_flops_per_tile}}}};
}

}  // namespace tokscale

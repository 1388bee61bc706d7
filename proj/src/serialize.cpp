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

#include "tokscale/serialize.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "tokscale/error.hpp"
#include "tokscale/nvt_io.hpp"

namespace tokscale::json {

json to_json(const TilePlan& plan) {
  json scales = json::array();
  for (const auto& s : plan.scales) {
    scales.push_back({{"scale_factor", s.scale_factor},
                      {"resized_height", s.resized_height},
                      {"resized_width", s.resized_width},
                      {"grid_rows", s.grid_rows},
                      {"grid_cols", s.grid_cols},
                      {"tiles", s.tiles()}});
  }
  return {{"image", {{"height", plan.image_height}, {"width", plan.image_width}}},
          {"tile_side", plan.config.tile_side},
          {"feature_side", plan.config.feature_side},
          {"min_tiles_largest_scale", plan.config.min_tiles_largest_scale},
          {"max_tiles_largest_scale", plan.config.max_tiles_largest_scale},
          {"scales", scales},
          {"total_tiles", plan.total_tiles()}};
}

json to_json(const TokenCount& c) {
  return {{"tiles", c.merged_tiles},
          {"encoded_tiles", c.encoded_tiles},
          {"tokens_per_tile", c.tokens_per_tile},
          {"merged_rows", c.merged_rows},
          {"merged_cols", c.merged_cols},
          {"total_tokens", c.total_tokens}};
}

json sidecar(const TokenGrid& g) {
  return {{"rows", g.rows()},         {"cols", g.cols()},
          {"channels", g.channels()}, {"frames", 1},
          {"k_applied", g.k_applied()}, {"interpolated", g.interpolated()}};
}

json sidecar(const VideoTokenTensor& v) {
  json j = sidecar(v.frame(0));
  j["frames"] = v.frames();
  return j;
}

namespace {

template <typename Fn>
void for_each_line(std::istream& is, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<SampleRecord> read_records_jsonl(std::istream& is) {
  std::vector<SampleRecord> out;
  for_each_line(is, [&](const json& j) {
    SampleRecord r;
    r.id = j.at("id").get<std::string>();
    r.subset = j.at("subset").get<std::string>();
    r.logp_small = j.at("logp_small").get<std::vector<double>>();
    r.logp_large = j.at("logp_large").get<std::vector<double>>();
    if (j.contains("features") && !j.at("features").is_null()) {
      r.features = j.at("features").get<std::vector<double>>();
    }
    out.push_back(std::move(r));
  });
  return out;
}

void write_records_jsonl(std::ostream& os, std::span<const SampleRecord> records) {
  for (const auto& r : records) {
    json j = {{"id", r.id},
              {"subset", r.subset},
              {"logp_small", r.logp_small},
              {"logp_large", r.logp_large}};
    if (r.features) j["features"] = *r.features;
    os << j.dump() << '\n';
  }
}

void write_manifest_jsonl(std::ostream& os, const PruneManifest& m,
                          std::span<const SampleRecord> records) {
  for (std::size_t i : m.kept) {
    os << json{{"id", records[i].id}, {"subset", records[i].subset}}.dump() << '\n';
  }
}

json manifest_summary(const PruneManifest& m) {
  json subsets = json::object();
  std::size_t total = 0;
  for (const auto& s : m.subsets) {
    subsets[s.subset] = {{"total", s.total}, {"kept", s.kept}, {"ratio", s.ratio}};
    total += s.total;
  }
  json j = {{"method", to_string(m.method)},
            {"total", total},
            {"kept", m.kept.size()},
            {"subsets", subsets}};
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  if (m.method == PruneMethod::kCluster) j["k_clusters"] = m.k_clusters;
  if (m.method == PruneMethod::kDeltaLoss) {
    j["aggregation"] = m.aggregation == Aggregation::kMean ? "mean" : "sum";
  }
  return j;
}

std::vector<SeqSample> read_samples_jsonl(std::istream& is) {
  std::vector<SeqSample> out;
  for_each_line(is, [&](const json& j) {
    SeqSample s;
    s.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                  : j.at("id").dump();
    if (j.contains("tokens")) {
      s.payload = j.at("tokens").get<std::vector<std::int32_t>>();
    } else {
      const auto n = j.at("length").get<std::size_t>();
      s.payload.resize(n);
      for (std::size_t t = 0; t < n; ++t) s.payload[t] = static_cast<std::int32_t>(t);
    }
    out.push_back(std::move(s));
  });
  return out;
}

json to_json(const PackResult& r, const PackPolicy& policy) {
  json contexts = json::array();
  for (const auto& c : r.batch.contexts) {
    json segs = json::array();
    for (const auto& s : c.segments) {
      segs.push_back({{"id", s.id}, {"offset", s.offset}, {"length", s.length}});
    }
    contexts.push_back({{"index", c.index}, {"used", c.used()}, {"segments", segs}});
  }
  json errors = json::array();
  for (const auto& e : r.errors) {
    errors.push_back({{"id", e.id}, {"length", e.length}, {"reason", e.reason}});
  }
  return {{"capacity", r.batch.capacity},
          {"policy", policy.to_string()},
          {"contexts", contexts},
          {"num_contexts", r.batch.contexts.size()},
          {"used_tokens", r.batch.used_tokens()},
          {"utilization", r.batch.utilization()},
          {"errors", errors}};
}

void write_payload_blob(std::ostream& os, const PackedBatch& b) {
  std::vector<std::int32_t> data(b.contexts.size() * b.capacity, 0);
  for (std::size_t i = 0; i < b.contexts.size(); ++i) {
    const auto& p = b.contexts[i].payload;
    if (p.size() > b.capacity) throw CorruptBatch("context exceeds capacity");
    std::copy(p.begin(), p.end(), data.begin() + static_cast<std::ptrdiff_t>(i * b.capacity));
  }
  const std::uint64_t dims[2] = {b.contexts.size(), b.capacity};
  io::write_nvi1(os, dims, data);
}

PackedBatch packed_batch_from(const json& table, std::istream& blob) {
  PackedBatch b;
  try {
    b.capacity = table.at("capacity").get<std::size_t>();
    const io::RawIntTensor raw = io::read_nvi1(blob);
    const auto& ctxs = table.at("contexts");
    if (raw.dims.size() != 2 || raw.dims[0] != ctxs.size() ||
        raw.dims[1] != b.capacity) {
      throw CorruptBatch("payload blob shape disagrees with the segment table");
    }
    for (std::size_t i = 0; i < ctxs.size(); ++i) {
      PackedContext c;
      c.index = ctxs[i].at("index").get<std::size_t>();
      const auto used = ctxs[i].at("used").get<std::size_t>();
      if (used > b.capacity) throw CorruptBatch("context exceeds capacity");
      const auto row = raw.data.begin() + static_cast<std::ptrdiff_t>(i * b.capacity);
      c.payload.assign(row, row + static_cast<std::ptrdiff_t>(used));
      c.segment_ids.assign(used, 0);
      std::int32_t ordinal = 0;
      for (const auto& s : ctxs[i].at("segments")) {
        Segment seg{s.at("id").get<std::string>(), s.at("offset").get<std::size_t>(),
                    s.at("length").get<std::size_t>()};
        ++ordinal;
        for (std::size_t t = seg.offset; t < seg.offset + seg.length && t < used; ++t) {
          c.segment_ids[t] = ordinal;
        }
        c.segments.push_back(std::move(seg));
      }
      b.contexts.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad segment table: ") + e.what());
  }
  return b;
}

json to_json(const CostReport& r) {
  return {{"model_prediction", true},
          {"flop_convention", "multiply-accumulate = 2 FLOPs; attention 4*L*n^2*d"},
          {"visual_tokens", r.visual_tokens},
          {"tiles", r.tiles},
          {"prefill_attention_flops", r.prefill_attention_flops},
          {"prefill_linear_flops", r.prefill_linear_flops},
          {"encoder_flops", r.encoder_flops},
          {"prefill_flops", r.prefill_flops()},
          {"context", r.context},
          {"decode_flops_per_token", r.decode_flops_per_token},
          {"weight_format", r.weight_format},
          {"weight_bits_per_token", r.weight_bits_per_token},
          {"weight_bytes_per_token", r.weight_bytes_per_token()},
          {"kv_cache_bytes", r.kv_cache_bytes}};
}

std::string csv_header() {
  return "visual_tokens,tiles,prefill_attention_flops,prefill_linear_flops,"
         "encoder_flops,context,decode_flops_per_token,weight_format,"
         "weight_bits_per_token,kv_cache_bytes";
}

std::string csv_row(const CostReport& r) {
  std::ostringstream os;
  os << r.visual_tokens << ',' << r.tiles << ',' << r.prefill_attention_flops << ','
     << r.prefill_linear_flops << ',' << r.encoder_flops << ',' << r.context << ','
     << r.decode_flops_per_token << ',' << r.weight_format << ','
     << r.weight_bits_per_token << ',' << r.kv_cache_bytes;
  return os.str();
}

json to_json(const QuantErrorReport& r) {
  return {{"max_abs_err", r.max_abs_err}, {"rmse", r.rmse},
          {"units", r.units},             {"scale_min", r.scale_min},
          {"scale_max", r.scale_max},     {"scale_mean", r.scale_mean},
          {"zero_units", r.zero_units}};
}

}  // namespace tokscale::json

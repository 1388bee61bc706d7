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

// tokscale: command-line entry point for the scale-then-compress pipeline.
//
// Exit codes: 0 ok, 1 domain error, 2 config or usage error, 3 I/O or
// format error. Machine output goes to stdout (or --output), diagnostics to
// stderr.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tokscale/cost_model.hpp"
#include "tokscale/dataset_prune.hpp"
#include "tokscale/error.hpp"
#include "tokscale/nvt_io.hpp"
#include "tokscale/pipeline_config.hpp"
#include "tokscale/quant_sim.hpp"
#include "tokscale/s2_tiling.hpp"
#include "tokscale/seq_pack.hpp"
#include "tokscale/serialize.hpp"
#include "tokscale/token_compress.hpp"

namespace {

using nlohmann::json;
namespace ser = tokscale::json;
using namespace tokscale;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
};

PipelineConfig load_config(const Globals& g) {
  return g.config_path.empty() ? PipelineConfig{} : load_pipeline_config(g.config_path);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  return out;
}

// Writes text to --output when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    return;
  }
  auto out = open_output(g.output);
  out << text;
  if (!out) throw FormatError("write failed: " + g.output);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- tile-plan

struct TilePlanArgs {
  std::size_t height = 0;
  std::size_t width = 0;
  std::string image;
};

void run_tile_plan(const Globals& g, const TilePlanArgs& a) {
  const PipelineConfig cfg = load_config(g);
  std::size_t h = a.height, w = a.width;
  if (!a.image.empty()) {
    const Image img = io::load_image(a.image);
    h = img.height();
    w = img.width();
  } else if (h == 0 || w == 0) {
    throw ConfigError("tile-plan needs --image or both --height and --width");
  }
  const TilePlan plan = plan_tiles(h, w, cfg.s2);
  json j = ser::to_json(plan);
  j["token_count"] = ser::to_json(count_tokens(plan, cfg.stc_k, cfg.s2.feature_side));
  j["token_count"]["k"] = cfg.stc_k;
  emit(g, dump(j));
}

// ------------------------------------------------------------------- encode

struct EncodeArgs {
  std::string image;
};

void run_encode(const Globals& g, const EncodeArgs& a) {
  const PipelineConfig cfg = load_config(g);
  const std::optional<std::uint64_t> seed = g.seed ? g.seed : cfg.encoder.seed;
  if (!seed) throw ConfigError("encode needs --seed (or encoder.seed in the config)");
  if (g.output.empty()) throw ConfigError("encode needs --output for the feature file");
  const Image img = io::load_image(a.image);
  const ToyPatchEncoder enc(cfg.s2.tile_side, cfg.s2.feature_side, cfg.encoder.channels,
                            *seed, img.channels());
  const TilePlan plan = plan_tiles(img.height(), img.width(), cfg.s2);
  const FeatureMap merged = multiscale_features(img, enc, plan);
  io::save_feature_map(g.output, merged);

  json j = ser::to_json(count_tokens(plan, cfg.stc_k, cfg.s2.feature_side));
  j["k"] = cfg.stc_k;
  j["feature_shape"] = {merged.height(), merged.width(), merged.channels()};
  j["seed"] = *seed;
  std::cout << dump(j);
}

// ----------------------------------------------------------------- compress

struct CompressArgs {
  std::string input;
  std::optional<std::size_t> k;
  std::optional<std::size_t> temporal_ratio;
  std::string mode = "per-tile";
  std::string sidecar;
};

void run_compress(const Globals& g, const CompressArgs& a) {
  const PipelineConfig cfg = load_config(g);
  const std::size_t k = a.k.value_or(cfg.stc_k);
  if (g.output.empty()) throw ConfigError("compress needs --output for the token file");
  io::RawTensor raw = io::load_nvt1(a.input);
  json side;
  std::size_t tokens = 0;
  auto out = open_output(g.output);

  if (raw.dims.size() == 4) {
    const std::size_t ratio = a.temporal_ratio.value_or(cfg.temporal_pool_ratio);
    const auto f = static_cast<std::size_t>(raw.dims[0]);
    const auto h = static_cast<std::size_t>(raw.dims[1]);
    const auto w = static_cast<std::size_t>(raw.dims[2]);
    const auto c = static_cast<std::size_t>(raw.dims[3]);
    if (f == 0) throw InvalidArgument("video tensor has no frames");
    std::vector<TokenGrid> frames;
    const std::size_t per = h * w * c;
    for (std::size_t i = 0; i < f; ++i) {
      std::vector<float> v(raw.data.begin() + static_cast<std::ptrdiff_t>(i * per),
                           raw.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
      frames.emplace_back(FeatureMap(h, w, c, std::move(v)), Provenance::kVideoFrame);
    }
    VideoTokenTensor pooled = temporal_pool(VideoTokenTensor(std::move(frames)), ratio);
    std::vector<TokenGrid> folded;
    for (const auto& fr : pooled.all_frames()) folded.push_back(stc_reshape(fr, k));
    const VideoTokenTensor result(std::move(folded));
    const TokenGrid& f0 = result.frame(0);
    const std::uint64_t dims[4] = {result.frames(), f0.rows(), f0.cols(), f0.channels()};
    std::vector<float> data;
    data.reserve(result.frames() * f0.tokens().size());
    for (const auto& fr : result.all_frames()) {
      data.insert(data.end(), fr.tokens().data().begin(), fr.tokens().data().end());
    }
    io::write_nvt1(out, dims, data);
    side = ser::sidecar(result);
    side["temporal_pool_ratio"] = ratio;
    tokens = result.token_count();
  } else {
    const FeatureMap m = io::feature_map_from_raw(std::move(raw));
    TokenGrid result(m);
    if (a.mode == "per-tile") {
      const std::size_t fs = cfg.s2.feature_side;
      if (m.height() % fs != 0 || m.width() % fs != 0) {
        throw InvalidArgument("per-tile compression needs map sides divisible by "
                              "feature_side " + std::to_string(fs));
      }
      result = stc_per_tile(m, m.height() / fs, m.width() / fs, k);
      side = ser::sidecar(result);
      side["tiles"] = (m.height() / fs) * (m.width() / fs);
    } else if (a.mode == "whole") {
      result = stc_reshape(result, k);
      side = ser::sidecar(result);
    } else {
      throw ConfigError("unknown --mode '" + a.mode + "'");
    }
    io::write_feature_map(out, result.tokens());
    tokens = result.token_count();
  }
  if (!out) throw FormatError("write failed: " + g.output);
  side["total_tokens"] = tokens;
  if (a.sidecar.empty()) {
    std::cout << dump(side);
  } else {
    auto s = open_output(a.sidecar);
    s << dump(side);
  }
}

// -------------------------------------------------------------------- prune

struct PruneArgs {
  std::string input;
  std::string method = "deltaloss";
  std::optional<double> ratio;
  std::vector<std::string> subset_ratios;
  std::size_t k_clusters = 8;
  std::string aggregation = "mean";
  std::string summary;
};

void run_prune(const Globals& g, const PruneArgs& a) {
  load_config(g);  // validated for consistency, no prune keys
  KeepRatios ratios;
  ratios.default_ratio = a.ratio;
  for (const auto& s : a.subset_ratios) {
    const auto eq = s.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--subset-ratio expects NAME=RATIO, got '" + s + "'");
    }
    try {
      std::size_t used = 0;
      const std::string num = s.substr(eq + 1);
      ratios.per_subset[s.substr(0, eq)] = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::logic_error&) {
      throw ConfigError("--subset-ratio has a bad ratio in '" + s + "'");
    }
  }
  if (!ratios.default_ratio && ratios.per_subset.empty()) {
    throw ConfigError("prune needs --ratio or --subset-ratio");
  }
  auto in = open_input(a.input);
  const std::vector<SampleRecord> records = ser::read_records_jsonl(in);

  PruneManifest m;
  if (a.method == "deltaloss") {
    Aggregation agg;
    if (a.aggregation == "mean") {
      agg = Aggregation::kMean;
    } else if (a.aggregation == "sum") {
      agg = Aggregation::kSum;
    } else {
      throw ConfigError("unknown --aggregation '" + a.aggregation + "'");
    }
    m = prune_deltaloss(records, ratios, agg);
  } else if (a.method == "cluster" || a.method == "random") {
    if (!g.seed) throw ConfigError("prune --method " + a.method + " needs --seed");
    m = a.method == "cluster" ? prune_cluster(records, a.k_clusters, ratios, *g.seed)
                              : prune_random(records, ratios, *g.seed);
  } else {
    throw ConfigError("unknown --method '" + a.method + "'");
  }
  std::ostringstream lines;
  ser::write_manifest_jsonl(lines, m, records);
  emit(g, lines.str());
  if (!a.summary.empty()) {
    auto s = open_output(a.summary);
    s << dump(ser::manifest_summary(m));
  }
}

// --------------------------------------------------------------------- pack

struct PackArgs {
  std::string input;
  std::size_t capacity = 0;
  std::string policy = "first-fit";
  std::size_t max_open = 0;
  std::string payload;
};

void run_pack(const Globals& g, const PackArgs& a) {
  load_config(g);
  PackPolicy policy;
  try {
    policy = PackPolicy::parse(a.policy);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  policy.max_open = a.max_open;
  auto in = open_input(a.input);
  const std::vector<SeqSample> samples = ser::read_samples_jsonl(in);
  const PackResult r = pack_stream(samples, a.capacity, policy);
  emit(g, dump(ser::to_json(r, policy)));
  if (!a.payload.empty()) {
    auto out = open_output(a.payload);
    ser::write_payload_blob(out, r.batch);
    if (!out) throw FormatError("write failed: " + a.payload);
  }
}

// -------------------------------------------------------------------- quant

struct QuantArgs {
  std::string input;
  std::string format;
  std::string granularity;
  std::optional<std::size_t> group_size;
  bool ragged = false;
  std::string report;
};

void run_quant(const Globals& g, const QuantArgs& a) {
  const PipelineConfig cfg = load_config(g);
  QuantSpec spec = cfg.quant;
  try {
    if (!a.format.empty()) {
      spec.format = parse_quant_format(a.format);
      if (a.granularity.empty()) {
        spec.granularity = spec.format == QuantFormat::kInt8Symmetric ? Granularity::kPerChannel
                           : spec.format == QuantFormat::kInt4Group   ? Granularity::kPerGroup
                                                                      : Granularity::kPerTensor;
      }
    }
    if (!a.granularity.empty()) spec.granularity = parse_granularity(a.granularity);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (a.group_size) spec.group_size = *a.group_size;
  spec.allow_ragged = spec.allow_ragged || a.ragged;

  const io::RawTensor raw = io::load_nvt1(a.input);
  const std::vector<std::size_t> shape(raw.dims.begin(), raw.dims.end());
  const std::vector<double> values(raw.data.begin(), raw.data.end());
  const QuantizedTensor q = quantize(values, shape, spec);
  json rep = ser::to_json(quant_error_report(values, shape, spec));
  rep["format"] = to_string(spec.format);
  rep["granularity"] = to_string(spec.granularity);
  if (spec.granularity == Granularity::kPerGroup) rep["group_size"] = spec.group_size;
  rep["shape"] = shape;
  if (!g.output.empty()) {
    auto out = open_output(g.output);
    write_quantized(out, q);
    if (!out) throw FormatError("write failed: " + g.output);
  }
  if (a.report.empty()) {
    std::cout << dump(rep);
  } else {
    auto s = open_output(a.report);
    s << dump(rep);
  }
}

// --------------------------------------------------------------------- cost

struct CostArgs {
  std::vector<std::uint64_t> tokens;
  std::vector<std::uint64_t> tiles;
  std::uint64_t context = 0;
  std::string weights = "fp16";
  std::optional<std::size_t> group_size;
  bool csv = false;
};

WeightFormat parse_weights(const std::string& s, std::optional<std::size_t> group) {
  if (s == "fp16") return std::nullopt;
  QuantSpec spec;
  try {
    spec.format = parse_quant_format(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(e.what()) + " (expected fp16, int8, int4 or fp8)");
  }
  switch (spec.format) {
    case QuantFormat::kInt8Symmetric: spec = QuantSpec::int8_per_channel(); break;
    case QuantFormat::kInt4Group: spec = QuantSpec::int4_group(group.value_or(128), true); break;
    case QuantFormat::kFp8E4M3: spec = QuantSpec::fp8_e4m3(); break;
  }
  return spec;
}

std::string two_decimals(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << x;
  return os.str();
}

void run_cost(const Globals& g, const CostArgs& a) {
  const PipelineConfig cfg = load_config(g);
  if (a.tokens.empty()) throw ConfigError("cost needs at least one --tokens");
  if (!a.tiles.empty() && a.tiles.size() != 1 && a.tiles.size() != a.tokens.size()) {
    throw ConfigError("--tiles must be given once or once per --tokens");
  }
  const WeightFormat fmt = parse_weights(a.weights, a.group_size);
  std::vector<CostReport> reports;
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    const std::uint64_t tiles =
        a.tiles.empty() ? 0 : a.tiles.size() == 1 ? a.tiles[0] : a.tiles[i];
    const std::uint64_t ctx = a.context ? a.context : a.tokens[i];
    reports.push_back(full_cost(a.tokens[i], tiles, cfg.model, fmt, ctx));
  }
  auto ratio = [&](std::size_t i) {
    const auto den = reports[i].prefill_attention_flops;
    return den == 0 ? 0.0
                    : static_cast<double>(reports[0].prefill_attention_flops) /
                          static_cast<double>(den);
  };
  if (a.csv) {
    std::string text = ser::csv_header() + ",attention_flop_ratio\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      text += ser::csv_row(reports[i]) + "," + two_decimals(ratio(i)) + "\n";
    }
    emit(g, text);
    return;
  }
  json rows = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    json r = ser::to_json(reports[i]);
    r["attention_flop_ratio_vs_first"] = ratio(i);
    r["attention_flop_ratio_display"] = two_decimals(ratio(i));
    rows.push_back(std::move(r));
  }
  emit(g, dump({{"model_prediction", true}, {"reports", rows}}));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const CorruptBatch*>(&e) ||
      dynamic_cast<const CorruptTensor*>(&e) ||
      dynamic_cast<const std::ios_base::failure*>(&e)) {
    return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tokscale: multi-scale tiling, token compression, pruning, packing, "
               "quantization and cost modelling"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Pipeline JSON config file");
  app.add_option("--seed", g.seed, "Seed for stochastic steps");
  app.add_option("--output,-o", g.output, "Output path");

  TilePlanArgs tp;
  auto* tile_plan = app.add_subcommand("tile-plan", "Print the multi-scale tile plan");
  tile_plan->add_option("--height", tp.height, "Image height in pixels");
  tile_plan->add_option("--width", tp.width, "Image width in pixels");
  tile_plan->add_option("--image", tp.image, "PPM (P6) or NVT1 image");

  EncodeArgs en;
  auto* encode = app.add_subcommand("encode", "Encode an image into a merged feature map");
  encode->add_option("--image,input", en.image, "PPM (P6) or NVT1 image")->required();

  CompressArgs cp;
  auto* compress = app.add_subcommand("compress", "STC-fold or temporally pool tokens");
  compress->add_option("--input,input", cp.input, "NVT1 features (h,w,c) or frames (f,h,w,c)")
      ->required();
  compress->add_option("--k", cp.k, "STC block side");
  compress->add_option("--temporal-ratio", cp.temporal_ratio, "Frames per pooled group");
  compress->add_option("--mode", cp.mode, "per-tile or whole (images only)");
  compress->add_option("--sidecar", cp.sidecar, "Write the JSON sidecar here");

  PruneArgs pr;
  auto* prune = app.add_subcommand("prune", "Select a subset of training records");
  prune->add_option("--input,input", pr.input, "Records JSONL")->required();
  prune->add_option("--method", pr.method, "deltaloss, cluster or random");
  prune->add_option("--ratio", pr.ratio, "Keep ratio for every subset");
  prune->add_option("--subset-ratio", pr.subset_ratios, "NAME=RATIO, repeatable");
  prune->add_option("--k-clusters", pr.k_clusters, "Clusters for --method cluster");
  prune->add_option("--aggregation", pr.aggregation, "mean or sum over answer tokens");
  prune->add_option("--summary", pr.summary, "Write the JSON summary here");

  PackArgs pk;
  auto* pack = app.add_subcommand("pack", "Pack a sample stream into fixed contexts");
  pack->add_option("--input,input", pk.input, "Samples JSONL")->required();
  pack->add_option("--capacity", pk.capacity, "Tokens per context")->required();
  pack->add_option("--policy", pk.policy, "first-fit or ffd:W");
  pack->add_option("--max-open", pk.max_open, "Open contexts before eviction (0 = unbounded)");
  pack->add_option("--payload", pk.payload, "Write the NVI1 payload blob here");

  QuantArgs qa;
  auto* quant = app.add_subcommand("quant", "Quantize an NVT1 tensor and report errors");
  quant->add_option("--input,input", qa.input, "NVT1 tensor")->required();
  quant->add_option("--format", qa.format, "int8, int4 or fp8");
  quant->add_option("--granularity", qa.granularity, "per-tensor, per-channel or per-group");
  quant->add_option("--group-size", qa.group_size, "Elements per group");
  quant->add_flag("--ragged", qa.ragged, "Allow a short final group");
  quant->add_option("--report", qa.report, "Write the JSON error report here");

  CostArgs ca;
  auto* cost = app.add_subcommand("cost", "Analytic prefill and decode cost");
  cost->add_option("--tokens", ca.tokens, "Visual tokens, repeatable")->required();
  cost->add_option("--tiles", ca.tiles, "Encoder tiles, once or per --tokens");
  cost->add_option("--context", ca.context, "Decode context length (default: tokens)");
  cost->add_option("--weights", ca.weights, "fp16, int8, int4 or fp8");
  cost->add_option("--group-size", ca.group_size, "int4 group size");
  cost->add_flag("--csv", ca.csv, "CSV instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*tile_plan) run_tile_plan(g, tp);
    if (*encode) run_encode(g, en);
    if (*compress) run_compress(g, cp);
    if (*prune) run_prune(g, pr);
    if (*pack) run_pack(g, pk);
    if (*quant) run_quant(g, qa);
    if (*cost) run_cost(g, ca);
  } catch (const std::exception& e) {
    std::cerr << "tokscale: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  std::cout.flush();
  return std::cout ? 0 : 3;
}

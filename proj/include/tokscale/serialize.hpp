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

// JSON / JSON-lines / CSV views of the pipeline's value types.

#ifndef TOKSCALE_SERIALIZE_HPP_
#define TOKSCALE_SERIALIZE_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokscale/cost_model.hpp"
#include "tokscale/dataset_prune.hpp"
#include "tokscale/quant_sim.hpp"
#include "tokscale/s2_tiling.hpp"
#include "tokscale/seq_pack.hpp"
#include "tokscale/token_compress.hpp"

namespace tokscale::json {

using nlohmann::json;

json to_json(const TilePlan& plan);
json to_json(const TokenCount& count);

// Sidecar for NVT1 token files:
// {rows, cols, channels, frames, k_applied, interpolated}.
json sidecar(const TokenGrid& grid);
json sidecar(const VideoTokenTensor& video);

// One SampleRecord per line: id, subset, logp_small, logp_large and an
// optional features array. Blank lines are skipped. Throws FormatError
// naming the line on malformed JSON or missing keys.
std::vector<SampleRecord> read_records_jsonl(std::istream& is);
void write_records_jsonl(std::ostream& os, std::span<const SampleRecord> records);

// Kept records as {"id", "subset"} lines in input order.
void write_manifest_jsonl(std::ostream& os, const PruneManifest& m,
                          std::span<const SampleRecord> records);
// {method, seed, k_clusters, aggregation, total, kept, subsets: {name:
// {total, kept, ratio}}}.
json manifest_summary(const PruneManifest& m);

// One sample per line: {"id", "tokens": [...]} or {"id", "length": N}; a
// bare length gets the payload 0, 1, ..., N-1.
std::vector<SeqSample> read_samples_jsonl(std::istream& is);

// Segment tables and refused samples; payloads travel as an NVI1 blob.
json to_json(const PackResult& r, const PackPolicy& policy);
// [contexts, capacity] i32 matrix, rows right-padded with 0.
void write_payload_blob(std::ostream& os, const PackedBatch& b);
// Rebuilds a batch from a segment-table document and its payload blob.
PackedBatch packed_batch_from(const json& table, std::istream& blob);

json to_json(const CostReport& r);
std::string csv_header();
std::string csv_row(const CostReport& r);

json to_json(const QuantErrorReport& r);

}  // namespace tokscale::json

#endif  // TOKSCALE_SERIALIZE_HPP_

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

// Training-set pruning by the log-likelihood gap between a large and a small
// reference model, with k-means and uniform-random baselines.
//
// The score of an example is log(p_large / p_small) over its answer tokens,
// reduced per token by mean (default) or sum. Within each subset the
// round(ratio * |subset|) highest-scoring examples are kept; ties go to the
// lexicographically smaller id.

#ifndef TOKSCALE_DATASET_PRUNE_HPP_
#define TOKSCALE_DATASET_PRUNE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tokscale {

struct SampleRecord {
  std::string id;
  std::string subset;
  std::vector<double> logp_small;  // per answer token, all <= 0
  std::vector<double> logp_large;
  std::optional<std::vector<double>> features;

  void validate() const;
};

enum class Aggregation { kMean, kSum };

double delta_score(const SampleRecord& r, Aggregation agg = Aggregation::kMean);

// Scores every record; parallel over records.
std::vector<double> delta_scores(std::span<const SampleRecord> records,
                                 Aggregation agg = Aggregation::kMean);

// Keep fraction per subset: an optional default plus per-subset overrides.
struct KeepRatios {
  std::optional<double> default_ratio;
  std::map<std::string, double> per_subset;

  KeepRatios() = default;
  KeepRatios(double ratio) : default_ratio(ratio) {}  // NOLINT: implicit

  double for_subset(const std::string& subset) const;
};

// round(ratio * n), half-up.
std::size_t keep_count(double ratio, std::size_t n);

enum class PruneMethod { kDeltaLoss, kCluster, kRandom };

const char* to_string(PruneMethod m);

struct SubsetSummary {
  std::string subset;
  std::size_t total = 0;
  std::size_t kept = 0;
  double ratio = 0.0;

  friend bool operator==(const SubsetSummary&, const SubsetSummary&) = default;
};

struct PruneManifest {
  PruneMethod method = PruneMethod::kDeltaLoss;
  std::vector<std::size_t> kept;       // ascending input indices
  std::vector<std::string> kept_ids;   // ids of `kept`, same order
  std::vector<SubsetSummary> subsets;  // sorted by subset name
  std::optional<std::uint64_t> seed;
  std::size_t k_clusters = 0;
  Aggregation aggregation = Aggregation::kMean;

  friend bool operator==(const PruneManifest&, const PruneManifest&) = default;
};

PruneManifest prune_deltaloss(std::span<const SampleRecord> records,
                              const KeepRatios& ratios,
                              Aggregation agg = Aggregation::kMean);

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;  // max centroid shift (Euclidean) to stop
};

struct KMeansResult {
  std::vector<std::size_t> assignment;
  std::vector<double> centroids;  // k x dim, row-major
  std::size_t iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm from a seeded balanced random partition. Points are
// n x dim row-major. Empty clusters keep their previous centroid; distance
// ties go to the lower cluster index.
KMeansResult kmeans(std::span<const double> points, std::size_t dim,
                    std::size_t k, std::uint64_t seed,
                    const KMeansOptions& opts = {});

// k-means within each subset (k capped at the subset size); the subset's
// round(ratio * n) quota is split across clusters by largest remainder and
// filled with the points nearest each centroid.
PruneManifest prune_cluster(std::span<const SampleRecord> records,
                            std::size_t k_clusters, const KeepRatios& ratios,
                            std::uint64_t seed, const KMeansOptions& opts = {});

// Uniform sample without replacement per subset.
PruneManifest prune_random(std::span<const SampleRecord> records,
                           const KeepRatios& ratios, std::uint64_t seed);

}  // namespace tokscale

#endif  // TOKSCALE_DATASET_PRUNE_HPP_

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

#include "tokscale/dataset_prune.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "rng.hpp"
#include "tokscale/error.hpp"

namespace tokscale {

void SampleRecord::validate() const {
  if (logp_small.empty() || logp_large.empty()) {
    throw InvalidArgument("record '" + id + "': empty answer-token log-probs");
  }
  if (logp_small.size() != logp_large.size()) {
    throw InvalidArgument("record '" + id +
                          "': small/large log-prob lengths differ");
  }
  for (const auto* list : {&logp_small, &logp_large}) {
    for (double v : *list) {
      if (!std::isfinite(v) || v > 0.0) {
        throw InvalidArgument("record '" + id +
                              "': log-probs must be finite and <= 0");
      }
    }
  }
  if (features) {
    for (double v : *features) {
      if (!std::isfinite(v)) {
        throw InvalidArgument("record '" + id + "': non-finite feature");
      }
    }
  }
}

double delta_score(const SampleRecord& r, Aggregation agg) {
  r.validate();
  const double large = std::accumulate(r.logp_large.begin(), r.logp_large.end(), 0.0);
  const double small = std::accumulate(r.logp_small.begin(), r.logp_small.end(), 0.0);
  if (agg == Aggregation::kSum) return large - small;
  const auto n = static_cast<double>(r.logp_large.size());
  return large / n - small / n;
}

std::vector<double> delta_scores(std::span<const SampleRecord> records,
                                 Aggregation agg) {
  std::vector<double> scores(records.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      scores[static_cast<std::size_t>(i)] =
          delta_score(records[static_cast<std::size_t>(i)], agg);
    } catch (...) {
#pragma omp critical(tokscale_score_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return scores;
}

double KeepRatios::for_subset(const std::string& subset) const {
  const auto it = per_subset.find(subset);
  if (it != per_subset.end()) return it->second;
  if (default_ratio) return *default_ratio;
  throw InvalidArgument("no keep ratio for subset '" + subset + "'");
}

std::size_t keep_count(double ratio, std::size_t n) {
  // The epsilon absorbs products such as 0.1 * 25 landing just under .5.
  const double k = std::floor(ratio * static_cast<double>(n) + 0.5 + 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

const char* to_string(PruneMethod m) {
  switch (m) {
    case PruneMethod::kDeltaLoss: return "deltaloss";
    case PruneMethod::kCluster: return "cluster";
    case PruneMethod::kRandom: return "random";
  }
  return "unknown";
}

namespace {

void check_ratio(double r, const std::string& subset) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw InvalidArgument("keep ratio for '" + subset + "' must be in (0, 1]");
  }
}

// Subset name -> input indices, in input order.
std::map<std::string, std::vector<std::size_t>> group_by_subset(
    std::span<const SampleRecord> records, const KeepRatios& ratios) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].validate();
    groups[records[i].subset].push_back(i);
  }
  for (const auto& [name, _] : ratios.per_subset) {
    if (!groups.contains(name)) {
      throw InvalidArgument("ratio given for unknown subset '" + name + "'");
    }
  }
  for (const auto& [name, _] : groups) check_ratio(ratios.for_subset(name), name);
  if (ratios.default_ratio) check_ratio(*ratios.default_ratio, "<default>");
  return groups;
}

PruneManifest finish(PruneMethod method, std::span<const SampleRecord> records,
                     std::vector<std::size_t> kept,
                     std::vector<SubsetSummary> subsets) {
  std::sort(kept.begin(), kept.end());
  PruneManifest m;
  m.method = method;
  m.kept_ids.reserve(kept.size());
  for (std::size_t i : kept) m.kept_ids.push_back(records[i].id);
  m.kept = std::move(kept);
  m.subsets = std::move(subsets);
  return m;
}

}  // namespace

PruneManifest prune_deltaloss(std::span<const SampleRecord> records,
                              const KeepRatios& ratios, Aggregation agg) {
  const auto groups = group_by_subset(records, ratios);
  const std::vector<double> scores = delta_scores(records, agg);
  std::vector<std::size_t> kept;
  std::vector<SubsetSummary> subsets;
  for (const auto& [name, members] : groups) {
    const double ratio = ratios.for_subset(name);
    const std::size_t k = keep_count(ratio, members.size());
    std::vector<std::size_t> order = members;
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        if (scores[a] != scores[b]) return scores[a] > scores[b];
                        if (records[a].id != records[b].id) {
                          return records[a].id < records[b].id;
                        }
                        return a < b;
                      });
    kept.insert(kept.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    subsets.push_back({name, members.size(), k, ratio});
  }
  PruneManifest m = finish(PruneMethod::kDeltaLoss, records, std::move(kept),
                           std::move(subsets));
  m.aggregation = agg;
  return m;
}

KMeansResult kmeans(std::span<const double> points, std::size_t dim,
                    std::size_t k, std::uint64_t seed,
                    const KMeansOptions& opts) {
  if (dim == 0 || points.size() % dim != 0) {
    throw InvalidArgument("kmeans: point buffer is not n x dim");
  }
  const std::size_t n = points.size() / dim;
  if (k == 0 || k > n) throw InvalidArgument("kmeans: need 1 <= k <= n");

  KMeansResult res;
  res.assignment.resize(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  detail::Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  for (std::size_t i = 0; i < n; ++i) res.assignment[perm[i]] = i % k;

  res.centroids.assign(k * dim, 0.0);
  auto update = [&] {
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = res.assignment[i];
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += points[i * dim + d];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double moved = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = sums[c * dim + d] / static_cast<double>(counts[c]);
        const double delta = v - res.centroids[c * dim + d];
        moved += delta * delta;
        res.centroids[c * dim + d] = v;
      }
      shift = std::max(shift, std::sqrt(moved));
    }
    return shift;
  };
  update();

  const auto count = static_cast<std::int64_t>(n);
  while (res.iterations < opts.max_iterations) {
#pragma omp parallel for schedule(static)
    for (std::int64_t si = 0; si < count; ++si) {
      const auto i = static_cast<std::size_t>(si);
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = points[i * dim + d] - res.centroids[c * dim + d];
          d2 += diff * diff;
        }
        if (d2 < best) {
          best = d2;
          arg = c;
        }
      }
      res.assignment[i] = arg;
    }
    ++res.iterations;
    if (update() <= opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

PruneManifest prune_cluster(std::span<const SampleRecord> records,
                            std::size_t k_clusters, const KeepRatios& ratios,
                            std::uint64_t seed, const KMeansOptions& opts) {
  if (k_clusters == 0 || k_clusters > records.size()) {
    throw InvalidArgument("cluster pruning needs 1 <= k_clusters <= #records");
  }
  std::size_t dim = 0;
  for (const auto& r : records) {
    if (!r.features || r.features->empty()) {
      throw InvalidArgument("record '" + r.id + "' has no feature vector");
    }
    if (dim == 0) dim = r.features->size();
    if (r.features->size() != dim) {
      throw InvalidArgument("feature vectors must share one dimension");
    }
  }
  const auto groups = group_by_subset(records, ratios);

  std::vector<std::size_t> kept;
  std::vector<SubsetSummary> subsets;
  for (const auto& [name, members] : groups) {
    const double ratio = ratios.for_subset(name);
    const std::size_t quota = keep_count(ratio, members.size());
    const std::size_t k = std::min(k_clusters, members.size());

    std::vector<double> pts;
    pts.reserve(members.size() * dim);
    for (std::size_t i : members) {
      pts.insert(pts.end(), records[i].features->begin(), records[i].features->end());
    }
    const KMeansResult km = kmeans(pts, dim, k, seed, opts);

    std::vector<std::vector<std::size_t>> clusters(k);  // local member indices
    for (std::size_t j = 0; j < members.size(); ++j) {
      clusters[km.assignment[j]].push_back(j);
    }

    // Largest-remainder split of the subset quota across clusters.
    std::vector<std::size_t> take(k);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double exact = ratio * static_cast<double>(clusters[c].size());
      take[c] = std::min(clusters[c].size(),
                         static_cast<std::size_t>(std::floor(exact + 1e-9)));
      assigned += take[c];
      remainders.emplace_back(exact - static_cast<double>(take[c]), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    while (assigned < quota) {
      bool progressed = false;
      for (const auto& [_, c] : remainders) {
        if (assigned == quota) break;
        if (take[c] < clusters[c].size()) {
          ++take[c];
          ++assigned;
          progressed = true;
        }
      }
      if (!progressed) break;
    }
    while (assigned > quota) {
      for (auto it = remainders.rbegin(); it != remainders.rend() && assigned > quota; ++it) {
        if (take[it->second] > 0) {
          --take[it->second];
          --assigned;
        }
      }
    }

    for (std::size_t c = 0; c < k; ++c) {
      auto& members_c = clusters[c];
      std::vector<double> dist(members_c.size());
      for (std::size_t m = 0; m < members_c.size(); ++m) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = pts[members_c[m] * dim + d] - km.centroids[c * dim + d];
          d2 += diff * diff;
        }
        dist[m] = d2;
      }
      std::vector<std::size_t> order(members_c.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        const auto& ia = records[members[members_c[a]]].id;
        const auto& ib = records[members[members_c[b]]].id;
        if (ia != ib) return ia < ib;
        return members_c[a] < members_c[b];
      });
      for (std::size_t m = 0; m < take[c]; ++m) {
        kept.push_back(members[members_c[order[m]]]);
      }
    }
    subsets.push_back({name, members.size(), quota, ratio});
  }
  PruneManifest m = finish(PruneMethod::kCluster, records, std::move(kept),
                           std::move(subsets));
  m.seed = seed;
  m.k_clusters = k_clusters;
  return m;
}

PruneManifest prune_random(std::span<const SampleRecord> records,
                           const KeepRatios& ratios, std::uint64_t seed) {
  const auto groups = group_by_subset(records, ratios);
  detail::Rng rng(seed);
  std::vector<std::size_t> kept;
  std::vector<SubsetSummary> subsets;
  for (const auto& [name, members] : groups) {
    const double ratio = ratios.for_subset(name);
    const std::size_t k = keep_count(ratio, members.size());
    std::vector<std::size_t> pool = members;
    // Partial Fisher-Yates: the first k slots become a uniform k-sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    }
    kept.insert(kept.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    subsets.push_back({name, members.size(), k, ratio});
  }
  PruneManifest m = finish(PruneMethod::kRandom, records, std::move(kept),
                           std::move(subsets));
  m.seed = seed;
  return m;
}

}  // namespace tokscale

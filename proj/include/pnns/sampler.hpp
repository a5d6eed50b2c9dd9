#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pnns/affinity.hpp"
#include "pnns/common.hpp"
#include "pnns/graph.hpp"
#include "pnns/partitioning.hpp"

// Hard negative mining: for each query, pick one high-affinity neighboring
// cluster and sample documents from it uniformly.

namespace pnns {

struct SamplerConfig {
  std::uint32_t window = 5;    // w: top-affinity clusters considered
  std::uint64_t budget = 256;  // t: total negatives per batch
  std::uint64_t seed = 0;
  bool affinity_proportional = false;  // comparison arm; uniform is the default
};

struct NegativePair {
  std::uint32_t query;  // query vertex id
  std::uint32_t doc;    // doc index
};

/// The w clusters with the largest affinity to c, excluding c itself.
/// Ties and zero-affinity padding resolve to lower cluster ids first.
inline std::vector<std::uint32_t> top_affinity_clusters(const AffinityMatrix& a, std::uint32_t c,
                                                        std::uint32_t w) {
  const std::uint32_t r = a.num_clusters();
  std::vector<std::uint32_t> ids;
  ids.reserve(r > 0 ? r - 1 : 0);
  for (std::uint32_t j = 0; j < r; ++j)
    if (j != c) ids.push_back(j);
  std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t x, std::uint32_t y) {
    std::uint64_t ax = a.at(c, x), ay = a.at(c, y);
    if (ax != ay) return ax > ay;
    return x < y;
  });
  if (ids.size() > w) ids.resize(w);
  return ids;
}

/// Mines hard negatives for a batch of queries. For each query in cluster c_i,
/// one cluster c_j is drawn from the top-w window (uniformly by default) and
/// ceil(t/n) distinct documents are sampled uniformly from c_j. Sampled pairs
/// never collide with positive edges of the graph. Deterministic under seed.
inline std::vector<NegativePair> sample_negatives(const BipartiteGraph& g, const Partitioning& p,
                                                  const AffinityMatrix& a,
                                                  std::span<const std::uint32_t> queries,
                                                  const SamplerConfig& cfg) {
  if (cfg.window < 1) throw DataError("sample_negatives: window must be >= 1");
  if (cfg.budget < 1) throw DataError("sample_negatives: budget must be >= 1");
  if (p.num_clusters < 2) throw DataError("sample_negatives: need at least 2 clusters");
  if (queries.empty()) return {};

  const auto docs = p.docs_by_cluster();
  const std::uint64_t per_query = (cfg.budget + queries.size() - 1) / queries.size();
  std::mt19937_64 rng(cfg.seed);
  std::vector<NegativePair> out;
  out.reserve(queries.size() * per_query);
  std::vector<std::uint32_t> taken;

  for (std::uint32_t q : queries) {
    if (q >= p.num_queries) throw DataError("sample_negatives: vertex " + std::to_string(q) + " is not a query");
    const std::uint32_t own = p.assignment[q];
    auto window = top_affinity_clusters(a, own, cfg.window);

    // Draw the cluster; clusters without documents are skipped and redrawn.
    std::vector<std::uint32_t> usable;
    for (std::uint32_t c : window)
      if (!docs[c].empty()) usable.push_back(c);
    if (usable.empty())
      throw DataError("sample_negatives: no window cluster of query '" + g.query_id(q) + "' contains documents");
    std::uint32_t chosen;
    if (cfg.affinity_proportional) {
      std::vector<double> wts;
      wts.reserve(usable.size());
      for (std::uint32_t c : usable) wts.push_back(double(a.at(own, c)) + 1e-12);
      std::discrete_distribution<std::size_t> dist(wts.begin(), wts.end());
      chosen = usable[dist(rng)];
    } else {
      std::uniform_int_distribution<std::size_t> dist(0, usable.size() - 1);
      chosen = usable[dist(rng)];
    }

    // Uniform draws from the chosen cluster; exact positives and repeats are
    // rejected so each query contributes exactly ceil(t/n) distinct pairs.
    // If the chosen cluster runs out of eligible docs, spill over the rest of
    // the window in order.
    taken.clear();
    std::size_t cluster_pos = 0;
    for (std::size_t i = 0; i < usable.size(); ++i)
      if (usable[i] == chosen) cluster_pos = i;
    std::size_t spilled = 0;
    std::uint32_t cluster = chosen;
    std::uint64_t attempts = 0;
    const std::uint64_t attempt_cap = 64 * per_query + 256;
    while (taken.size() < per_query) {
      const auto& pool = docs[cluster];
      if (attempts <= attempt_cap) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        std::uint32_t d = pool[pick(rng)];
        ++attempts;
        if (g.has_edge(q, d)) continue;
        if (std::find(taken.begin(), taken.end(), d) != taken.end()) continue;
        taken.push_back(d);
        continue;
      }
      // Deterministic sweep of the current cluster, then move on.
      for (std::uint32_t d : pool) {
        if (taken.size() >= per_query) break;
        if (g.has_edge(q, d)) continue;
        if (std::find(taken.begin(), taken.end(), d) != taken.end()) continue;
        taken.push_back(d);
      }
      if (taken.size() >= per_query) break;
      if (++spilled >= usable.size())
        throw DataError("sample_negatives: window of query '" + g.query_id(q) +
                        "' has too few non-positive documents");
      cluster_pos = (cluster_pos + 1) % usable.size();
      cluster = usable[cluster_pos];
      attempts = 0;
    }
    for (std::uint32_t d : taken) out.push_back({q, d});
  }
  return out;
}

/// Batch dump for trainer interop: `query_id<TAB>doc_id<TAB>0`.
inline void save_negatives(const BipartiteGraph& g, const std::vector<NegativePair>& pairs,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& pair : pairs) out << g.query_id(pair.query) << '\t' << g.doc_id(pair.doc) << "\t0\n";
}

}  // namespace pnns

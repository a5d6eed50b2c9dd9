#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pnns/affinity.hpp"
#include "pnns/embedding.hpp"
#include "pnns/graph.hpp"
#include "pnns/partitioning.hpp"
#include "pnns/sampler.hpp"

namespace pnns {

/// Negative provider backed by the graph-partitioning sampler. Requires the
/// trainer's query/doc indices to coincide with the graph's dense vertex
/// indices (the pipeline builds its training data from the graph tables).
class GraphNegatives final : public NegativeProvider {
 public:
  GraphNegatives(const BipartiteGraph& graph, const Partitioning& partitioning,
                 const AffinityMatrix& affinity, std::uint32_t window,
                 bool affinity_proportional = false)
      : graph_(graph), partitioning_(partitioning), affinity_(affinity), window_(window),
        affinity_proportional_(affinity_proportional) {}

  std::vector<std::pair<std::uint32_t, std::uint32_t>> sample(
      std::span<const std::uint32_t> batch_queries, std::uint64_t budget, std::uint64_t seed) override {
    SamplerConfig cfg;
    cfg.window = window_;
    cfg.budget = budget;
    cfg.seed = seed;
    cfg.affinity_proportional = affinity_proportional_;
    auto pairs = sample_negatives(graph_, partitioning_, affinity_, batch_queries, cfg);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.emplace_back(p.query, p.doc);
    return out;
  }

 private:
  const BipartiteGraph& graph_;
  const Partitioning& partitioning_;
  const AffinityMatrix& affinity_;
  std::uint32_t window_;
  bool affinity_proportional_;
};

}  // namespace pnns

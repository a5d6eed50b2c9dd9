#pragma once

#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnns/affinity.hpp"
#include "pnns/embedding.hpp"
#include "pnns/graph.hpp"
#include "pnns/graph_negatives.hpp"
#include "pnns/partitioning.hpp"

// Pipeline-level glue: aligning token tables with the graph's dense indices,
// splitting positives into train/eval, and running one training arm.

namespace pnns {

struct SplitData {
  TrainData train;  // token tables shared by both splits; positives = train slice
  std::vector<std::uint32_t> eval_queries;
  std::vector<std::vector<std::uint32_t>> eval_purchased;  // parallel to eval_queries
};

/// Builds token tables aligned to the graph's dense indices and holds out an
/// `eval_frac` fraction of positive edges as per-query purchase sets.
inline SplitData make_training_split(
    const BipartiteGraph& graph,
    const std::unordered_map<std::string, std::vector<std::string>>& tokens, double eval_frac,
    std::uint64_t seed) {
  SplitData out;
  out.train.query_tokens.resize(graph.num_queries());
  out.train.doc_tokens.resize(graph.num_docs());
  for (std::uint32_t q = 0; q < graph.num_queries(); ++q) {
    auto it = tokens.find(graph.query_id(q));
    if (it == tokens.end()) throw DataError("no tokens for query '" + graph.query_id(q) + "'");
    out.train.query_tokens[q] = it->second;
  }
  for (std::uint32_t d = 0; d < graph.num_docs(); ++d) {
    auto it = tokens.find(graph.doc_id(d));
    if (it == tokens.end()) throw DataError("no tokens for doc '" + graph.doc_id(d) + "'");
    out.train.doc_tokens[d] = it->second;
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> positives;
  for (std::uint32_t q = 0; q < graph.num_queries(); ++q)
    for (std::uint32_t v : graph.neighbors(q)) positives.emplace_back(q, v - graph.num_queries());
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 17);
  std::shuffle(positives.begin(), positives.end(), rng);
  std::size_t eval_count = static_cast<std::size_t>(double(positives.size()) * eval_frac);
  std::vector<std::vector<std::uint32_t>> purchased(graph.num_queries());
  for (std::size_t i = 0; i < eval_count; ++i) purchased[positives[i].first].push_back(positives[i].second);
  out.train.positives.assign(positives.begin() + std::ptrdiff_t(eval_count), positives.end());
  for (std::uint32_t q = 0; q < graph.num_queries(); ++q)
    if (!purchased[q].empty()) {
      out.eval_queries.push_back(q);
      out.eval_purchased.push_back(std::move(purchased[q]));
    }
  return out;
}

struct TrainArtifacts {
  EmbeddingModel<float> model;
  MatchingMetrics metrics;
  TrainResult history;
};

/// Trains one negative-sampling arm and evaluates Matching MAP/Recall@100 on
/// the held-out purchase sets. With a single cluster there is no neighboring
/// cluster to mine, so the graph arm degenerates to random negatives.
inline TrainArtifacts run_training(const BipartiteGraph& graph, const SplitData& split,
                                   const TrainConfig& cfg, const Partitioning* partitioning,
                                   const AffinityMatrix* affinity) {
  std::unique_ptr<NegativeProvider> provider;
  if (cfg.negatives == NegativeMode::kGraph && partitioning && partitioning->num_clusters >= 2) {
    if (!affinity) throw DataError("graph negatives need an affinity matrix");
    provider = std::make_unique<GraphNegatives>(graph, *partitioning, *affinity, cfg.window);
  } else if (cfg.negatives == NegativeMode::kGraph && !partitioning) {
    throw DataError("graph negatives need a partitioning");
  } else {
    provider = std::make_unique<RandomNegatives>(graph.num_docs(), split.train.positives);
  }
  TrainArtifacts out;
  out.model = train<float>(split.train, cfg, provider.get(), &out.history);

  std::vector<std::vector<std::string>> eval_tokens;
  eval_tokens.reserve(split.eval_queries.size());
  for (std::uint32_t q : split.eval_queries) eval_tokens.push_back(split.train.query_tokens[q]);
  out.metrics = evaluate_matching(out.model, eval_tokens, split.eval_purchased, split.train.doc_tokens, 100);
  return out;
}

}  // namespace pnns

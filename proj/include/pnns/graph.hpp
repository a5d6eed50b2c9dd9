#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/interactions.hpp"

namespace pnns {

/// Weighted bipartite interaction graph over queries and documents.
///
/// Vertices carry dense indices in first-seen order. A unified vertex id space
/// is used for partitioning: queries occupy [0, num_queries), documents occupy
/// [num_queries, num_queries + num_docs). Adjacency is CSR over the unified
/// ids, with every edge stored from both endpoints.
class BipartiteGraph {
 public:
  std::uint32_t num_queries() const { return static_cast<std::uint32_t>(query_ids_.size()); }
  std::uint32_t num_docs() const { return static_cast<std::uint32_t>(doc_ids_.size()); }
  std::uint32_t num_vertices() const { return num_queries() + num_docs(); }
  std::uint64_t num_edges() const { return edge_count_; }
  std::uint64_t total_edge_weight() const { return total_weight_; }

  const std::string& query_id(std::uint32_t q) const { return query_ids_[q]; }
  const std::string& doc_id(std::uint32_t d) const { return doc_ids_[d]; }
  const std::vector<std::string>& query_ids() const { return query_ids_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

  std::uint32_t doc_vertex(std::uint32_t d) const { return num_queries() + d; }
  bool is_query_vertex(std::uint32_t v) const { return v < num_queries(); }

  /// Entity string id for a unified vertex id.
  const std::string& vertex_id(std::uint32_t v) const {
    return is_query_vertex(v) ? query_ids_[v] : doc_ids_[v - num_queries()];
  }

  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  std::span<const std::uint32_t> edge_weights(std::uint32_t v) const {
    return {weights_.data() + offsets_[v], weights_.data() + offsets_[v + 1]};
  }
  std::uint32_t degree(std::uint32_t v) const {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }

  /// True if (q, d) is a positive edge; used to keep sampled negatives off 𝒫.
  bool has_edge(std::uint32_t query, std::uint32_t doc_index) const {
    auto nbrs = neighbors(query);
    std::uint32_t dv = doc_vertex(doc_index);
    return std::binary_search(nbrs.begin(), nbrs.end(), dv);
  }

  std::int64_t find_query(const std::string& id) const {
    auto it = query_index_.find(id);
    return it == query_index_.end() ? -1 : std::int64_t(it->second);
  }
  std::int64_t find_doc(const std::string& id) const {
    auto it = doc_index_.find(id);
    return it == doc_index_.end() ? -1 : std::int64_t(it->second);
  }

  friend BipartiteGraph build_graph(const std::vector<InteractionRecord>& records);

 private:
  std::vector<std::string> query_ids_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::uint32_t> query_index_;
  std::unordered_map<std::string, std::uint32_t> doc_index_;
  std::vector<std::uint64_t> offsets_;  // size num_vertices()+1
  std::vector<std::uint32_t> adj_;      // unified neighbor ids
  std::vector<std::uint32_t> weights_;  // parallel to adj_
  std::uint64_t edge_count_ = 0;
  std::uint64_t total_weight_ = 0;
};

/// Aggregates duplicate (q, d) records by summing weights and builds the CSR
/// graph. Vertex indices follow first-seen order in `records`.
inline BipartiteGraph build_graph(const std::vector<InteractionRecord>& records) {
  if (records.empty()) throw DataError("build_graph: no interaction records");
  BipartiteGraph g;
  auto intern = [](std::unordered_map<std::string, std::uint32_t>& index,
                   std::vector<std::string>& ids, const std::string& id) {
    auto [it, inserted] = index.try_emplace(id, static_cast<std::uint32_t>(ids.size()));
    if (inserted) ids.push_back(id);
    return it->second;
  };

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (q index, d index)
  pairs.reserve(records.size());
  std::vector<std::uint32_t> pair_weights;
  pair_weights.reserve(records.size());
  for (const auto& r : records) {
    if (r.query_id.empty() || r.doc_id.empty()) throw DataError("build_graph: empty entity id");
    if (r.weight == 0) throw DataError("build_graph: zero edge weight for (" + r.query_id + ", " + r.doc_id + ")");
    std::uint32_t q = intern(g.query_index_, g.query_ids_, r.query_id);
    std::uint32_t d = intern(g.doc_index_, g.doc_ids_, r.doc_id);
    pairs.emplace_back(q, d);
    pair_weights.push_back(r.weight);
  }
  for (const auto& id : g.query_ids_)
    if (g.doc_index_.count(id))
      throw DataError("build_graph: id '" + id + "' appears as both query and doc; id namespaces must be disjoint");

  // Aggregate duplicates.
  std::unordered_map<std::uint64_t, std::uint64_t> agg;  // (q<<32|d) -> weight
  agg.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::uint64_t key = (std::uint64_t(pairs[i].first) << 32) | pairs[i].second;
    agg[key] += pair_weights[i];
  }

  const std::uint32_t nq = g.num_queries();
  const std::uint32_t nv = g.num_vertices();
  std::vector<std::uint64_t> deg(nv, 0);
  for (const auto& [key, w] : agg) {
    std::uint32_t q = static_cast<std::uint32_t>(key >> 32);
    std::uint32_t d = static_cast<std::uint32_t>(key & 0xffffffffu);
    ++deg[q];
    ++deg[nq + d];
    g.total_weight_ += w;
  }
  g.edge_count_ = agg.size();
  g.offsets_.assign(nv + 1, 0);
  for (std::uint32_t v = 0; v < nv; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adj_.resize(g.offsets_[nv]);
  g.weights_.resize(g.offsets_[nv]);
  std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [key, w] : agg) {
    std::uint32_t q = static_cast<std::uint32_t>(key >> 32);
    std::uint32_t dv = nq + static_cast<std::uint32_t>(key & 0xffffffffu);
    std::uint32_t cw = static_cast<std::uint32_t>(std::min<std::uint64_t>(w, UINT32_MAX));
    g.adj_[cursor[q]] = dv;
    g.weights_[cursor[q]++] = cw;
    g.adj_[cursor[dv]] = q;
    g.weights_[cursor[dv]++] = cw;
  }
  // Sorted neighbor lists give deterministic traversal and binary-search lookup.
  for (std::uint32_t v = 0; v < nv; ++v) {
    auto begin = g.offsets_[v], end = g.offsets_[v + 1];
    std::vector<std::pair<std::uint32_t, std::uint32_t>> row;
    row.reserve(end - begin);
    for (auto i = begin; i < end; ++i) row.emplace_back(g.adj_[i], g.weights_[i]);
    std::sort(row.begin(), row.end());
    for (auto i = begin; i < end; ++i) {
      g.adj_[i] = row[i - begin].first;
      g.weights_[i] = row[i - begin].second;
    }
  }
  return g;
}

/// Writes the two id tables next to the interactions TSV: one id per line,
/// line number = dense index.
inline void save_id_tables(const BipartiteGraph& g, const std::string& query_path,
                           const std::string& doc_path) {
  std::ofstream qs(query_path), ds(doc_path);
  if (!qs || !ds) throw DataError("cannot write id tables");
  for (const auto& id : g.query_ids()) qs << id << '\n';
  for (const auto& id : g.doc_ids()) ds << id << '\n';
}

}  // namespace pnns

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/graph.hpp"

namespace pnns {

/// A complete assignment of vertices (queries and documents jointly) to
/// clusters [0, num_clusters). Balance means no cluster exceeds
/// (1 + eps) * ceil(|V| / r) vertices.
struct Partitioning {
  std::vector<std::uint32_t> assignment;  // unified vertex id -> cluster
  std::uint32_t num_clusters = 1;
  double eps = 0.05;
  std::uint32_t num_queries = 0;  // ids below this are queries
  std::uint64_t seed = 0;

  std::uint32_t num_vertices() const { return static_cast<std::uint32_t>(assignment.size()); }
  std::uint32_t num_docs() const { return num_vertices() - num_queries; }
  std::uint32_t cluster_of_query(std::uint32_t q) const { return assignment[q]; }
  std::uint32_t cluster_of_doc(std::uint32_t d) const { return assignment[num_queries + d]; }

  std::vector<std::uint32_t> cluster_sizes() const {
    std::vector<std::uint32_t> sizes(num_clusters, 0);
    for (std::uint32_t c : assignment) ++sizes[c];
    return sizes;
  }

  /// Document ids per cluster, ascending within each cluster.
  std::vector<std::vector<std::uint32_t>> docs_by_cluster() const {
    std::vector<std::vector<std::uint32_t>> out(num_clusters);
    for (std::uint32_t d = 0; d < num_docs(); ++d) out[cluster_of_doc(d)].push_back(d);
    return out;
  }
};

inline std::uint64_t ideal_cluster_size(std::uint64_t num_vertices, std::uint32_t r) {
  return (num_vertices + r - 1) / r;
}

/// max cluster size / ceil(|V| / r); <= 1 + eps for any partition() output.
inline double balance_factor(const Partitioning& p) {
  if (p.assignment.empty()) return 0.0;
  std::uint32_t max_size = 0;
  for (std::uint32_t s : p.cluster_sizes()) max_size = std::max(max_size, s);
  return double(max_size) / double(ideal_cluster_size(p.num_vertices(), p.num_clusters));
}

/// Imbalance over documents alone. Balance is only enforced over the union of
/// queries and documents, so this is a measurement, not a guarantee.
inline double doc_balance_factor(const Partitioning& p) {
  if (p.num_docs() == 0) return 0.0;
  std::vector<std::uint32_t> sizes(p.num_clusters, 0);
  for (std::uint32_t d = 0; d < p.num_docs(); ++d) ++sizes[p.cluster_of_doc(d)];
  std::uint32_t max_size = *std::max_element(sizes.begin(), sizes.end());
  return double(max_size) / double(ideal_cluster_size(p.num_docs(), p.num_clusters));
}

/// Total weight of edges whose endpoints lie in different clusters.
inline std::uint64_t edge_cut(const BipartiteGraph& g, const Partitioning& p) {
  if (p.assignment.size() != g.num_vertices())
    throw DataError("edge_cut: partitioning does not cover the graph");
  std::uint64_t cut = 0;
  for (std::uint32_t q = 0; q < g.num_queries(); ++q) {
    auto nbrs = g.neighbors(q);
    auto ws = g.edge_weights(q);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      if (p.assignment[q] != p.assignment[nbrs[i]]) cut += ws[i];
  }
  return cut;
}

/// Partitioning file: header `#r=<r> eps=<eps> seed=<seed>`, then
/// `entity_id<TAB>cluster_id` covering all queries and docs.
inline void save_partitioning(const Partitioning& p, const BipartiteGraph& g, const std::string& path) {
  if (p.assignment.size() != g.num_vertices())
    throw DataError("save_partitioning: partitioning does not cover the graph");
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  char header[96];
  std::snprintf(header, sizeof(header), "#r=%u eps=%.6g seed=%llu\n", p.num_clusters, p.eps,
                static_cast<unsigned long long>(p.seed));
  out << header;
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v)
    out << g.vertex_id(v) << '\t' << p.assignment[v] << '\n';
}

/// Partitioning file parsed without a graph: string entity id -> cluster.
struct PartitionLabels {
  std::unordered_map<std::string, std::uint32_t> cluster_of;
  std::uint32_t num_clusters = 1;
  double eps = 0.05;
  std::uint64_t seed = 0;
};

inline PartitionLabels load_partition_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partitioning file: " + path);
  PartitionLabels out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      unsigned r = 0;
      double eps = 0;
      unsigned long long seed = 0;
      if (std::sscanf(line.c_str(), "#r=%u eps=%lf seed=%llu", &r, &eps, &seed) == 3) {
        out.num_clusters = r;
        out.eps = eps;
        out.seed = seed;
      }
      continue;
    }
    auto cols = detail::split(line, '\t');
    if (cols.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected `entity_id<TAB>cluster_id`");
    std::uint32_t cluster = 0;
    try {
      cluster = static_cast<std::uint32_t>(std::stoul(std::string(cols[1])));
    } catch (...) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad cluster id '" + std::string(cols[1]) + "'");
    }
    out.cluster_of[std::string(cols[0])] = cluster;
    out.num_clusters = std::max(out.num_clusters, cluster + 1);
  }
  return out;
}

inline Partitioning load_partitioning(const BipartiteGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partitioning file: " + path);
  Partitioning p;
  p.num_queries = g.num_queries();
  p.assignment.assign(g.num_vertices(), UINT32_MAX);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      unsigned r = 0;
      double eps = 0;
      unsigned long long seed = 0;
      if (std::sscanf(line.c_str(), "#r=%u eps=%lf seed=%llu", &r, &eps, &seed) == 3) {
        p.num_clusters = r;
        p.eps = eps;
        p.seed = seed;
      }
      continue;
    }
    auto cols = detail::split(line, '\t');
    if (cols.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected `entity_id<TAB>cluster_id`");
    std::string id(cols[0]);
    std::uint32_t cluster = 0;
    try {
      cluster = static_cast<std::uint32_t>(std::stoul(std::string(cols[1])));
    } catch (...) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad cluster id '" + std::string(cols[1]) + "'");
    }
    std::int64_t v = g.find_query(id);
    if (v < 0) {
      std::int64_t d = g.find_doc(id);
      if (d < 0) throw DataError(path + ":" + std::to_string(lineno) + ": unknown entity '" + id + "'");
      v = g.doc_vertex(static_cast<std::uint32_t>(d));
    }
    p.assignment[static_cast<std::size_t>(v)] = cluster;
    p.num_clusters = std::max(p.num_clusters, cluster + 1);
  }
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v)
    if (p.assignment[v] == UINT32_MAX)
      throw DataError(path + ": entity '" + g.vertex_id(v) + "' missing from partitioning");
  return p;
}

}  // namespace pnns

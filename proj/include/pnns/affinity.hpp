#pragma once

#include <cstdint>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/graph.hpp"
#include "pnns/partitioning.hpp"

namespace pnns {

/// Symmetric r x r matrix of cross-cluster edge weight. A[i][j] for i != j is
/// the total weight of edges with one endpoint in cluster i and the other in
/// cluster j; the diagonal holds within-cluster weight and is never consulted
/// by the negative sampler.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;
  explicit AffinityMatrix(std::uint32_t r) : r_(r), cells_(std::size_t(r) * r, 0) {}

  std::uint32_t num_clusters() const { return r_; }
  std::uint64_t at(std::uint32_t i, std::uint32_t j) const { return cells_[std::size_t(i) * r_ + j]; }
  void add(std::uint32_t i, std::uint32_t j, std::uint64_t w) {
    cells_[std::size_t(i) * r_ + j] += w;
    if (i != j) cells_[std::size_t(j) * r_ + i] += w;
  }

  /// Sum over i < j of A[i][j]; equals the partitioning's edge cut.
  std::uint64_t off_diagonal_total() const {
    std::uint64_t total = 0;
    for (std::uint32_t i = 0; i < r_; ++i)
      for (std::uint32_t j = i + 1; j < r_; ++j) total += at(i, j);
    return total;
  }

 private:
  std::uint32_t r_ = 0;
  std::vector<std::uint64_t> cells_;
};

inline AffinityMatrix cluster_affinity(const BipartiteGraph& g, const Partitioning& p) {
  if (p.assignment.size() != g.num_vertices())
    throw DataError("cluster_affinity: partitioning does not cover the graph");
  AffinityMatrix a(p.num_clusters);
  for (std::uint32_t q = 0; q < g.num_queries(); ++q) {
    auto nbrs = g.neighbors(q);
    auto ws = g.edge_weights(q);
    for (std::size_t i = 0; i < nbrs.size(); ++i) a.add(p.assignment[q], p.assignment[nbrs[i]], ws[i]);
  }
  return a;
}

}  // namespace pnns

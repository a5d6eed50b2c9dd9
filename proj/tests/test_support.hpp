#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pnns/graph.hpp"
#include "pnns/interactions.hpp"
#include "pnns/partitioning.hpp"
#include "pnns/vectors.hpp"

// Shared helpers and independent oracles for the test suites.

namespace test_support {

inline pnns::InteractionRecord rec(std::string q, std::string d, std::uint32_t w = 1) {
  return {std::move(q), std::move(d), w};
}

// Random bipartite interaction set: every (q, d) pair present with
// probability density, weights uniform in [1, max_weight].
inline std::vector<pnns::InteractionRecord> random_records(std::uint32_t nq, std::uint32_t nd,
                                                           double density, std::uint32_t max_weight,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> w(1, max_weight);
  std::vector<pnns::InteractionRecord> records;
  for (std::uint32_t q = 0; q < nq; ++q)
    for (std::uint32_t d = 0; d < nd; ++d)
      if (coin(rng) < density) records.push_back(rec("q" + std::to_string(q), "d" + std::to_string(d), w(rng)));
  if (records.empty()) records.push_back(rec("q0", "d0", 1));
  return records;
}

// Brute-force edge scan: total weight of edges crossing the partition.
inline std::uint64_t cut_by_edge_scan(const pnns::BipartiteGraph& g, const pnns::Partitioning& p) {
  std::uint64_t cut = 0;
  for (std::uint32_t q = 0; q < g.num_queries(); ++q) {
    auto nbrs = g.neighbors(q);
    auto ws = g.edge_weights(q);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      if (p.assignment[q] != p.assignment[nbrs[i]]) cut += ws[i];
  }
  return cut;
}

inline pnns::Partitioning random_partitioning(const pnns::BipartiteGraph& g, std::uint32_t r,
                                              std::uint64_t seed) {
  pnns::Partitioning p;
  p.num_clusters = r;
  p.num_queries = g.num_queries();
  p.assignment.resize(g.num_vertices());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, r - 1);
  for (auto& c : p.assignment) c = pick(rng);
  return p;
}

inline pnns::VectorSet random_vectors(std::size_t count, std::uint32_t dim, std::uint64_t seed) {
  pnns::VectorSet vs;
  vs.dim = dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.f, 1.f);
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (auto& v : row) v = gauss(rng);
    vs.append(i, row);
  }
  return vs;
}

// Gaussian blob corpus: `blobs` well-separated centers, normalized rows.
inline pnns::VectorSet blob_vectors(std::size_t count, std::uint32_t dim, std::uint32_t blobs,
                                    float spread, std::uint64_t seed,
                                    std::vector<std::uint32_t>* labels = nullptr) {
  pnns::VectorSet vs;
  vs.dim = dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.f, 1.f);
  std::vector<std::vector<float>> centers(blobs, std::vector<float>(dim));
  for (auto& c : centers) {
    for (auto& v : c) v = gauss(rng);
    pnns::normalize_in_place(c);
  }
  std::uniform_int_distribution<std::uint32_t> pick(0, blobs - 1);
  std::vector<float> row(dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t b = pick(rng);
    if (labels) labels->push_back(b);
    for (std::uint32_t d = 0; d < dim; ++d) row[d] = centers[b][d] + spread * gauss(rng);
    pnns::normalize_in_place(row);
    vs.append(i, row);
  }
  return vs;
}

}  // namespace test_support

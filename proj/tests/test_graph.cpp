#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "pnns/affinity.hpp"
#include "pnns/graph.hpp"
#include "pnns/interactions.hpp"
#include "test_support.hpp"

using namespace pnns;
using test_support::rec;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_interactions parses well-formed TSV") {
  auto path = write_temp("inter_ok.tsv", "red shoes\tD1\t2\nq2\tD2\t1\n");
  auto records = load_interactions(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].query_id == "red shoes");
  CHECK(records[0].doc_id == "D1");
  CHECK(records[0].weight == 2);
}

TEST_CASE("load_interactions on empty file yields empty list") {
  auto path = write_temp("inter_empty.tsv", "");
  CHECK(load_interactions(path).empty());
}

TEST_CASE("load_interactions rejects bad rows with line numbers") {
  auto zero = write_temp("inter_zero.tsv", "q\tD1\t0\n");
  CHECK_THROWS_WITH(load_interactions(zero), Catch::Matchers::ContainsSubstring(":1:"));
  auto cols = write_temp("inter_cols.tsv", "q\tD1\n");
  CHECK_THROWS_AS(load_interactions(cols), DataError);
  auto nonint = write_temp("inter_nonint.tsv", "q\tD1\tx7\n");
  CHECK_THROWS_AS(load_interactions(nonint), DataError);
  CHECK_THROWS_AS(load_interactions("/nonexistent/interactions.tsv"), DataError);
}

TEST_CASE("build_graph aggregates duplicate pairs by weight") {
  auto g = build_graph({rec("q1", "d1", 1), rec("q1", "d1", 2)});
  CHECK(g.num_edges() == 1);
  CHECK(g.total_edge_weight() == 3);
  CHECK(g.edge_weights(0)[0] == 3);
}

TEST_CASE("build_graph counts vertices and weights") {
  auto g = build_graph({rec("q1", "d1"), rec("q2", "d2")});
  CHECK(g.num_queries() == 2);
  CHECK(g.num_docs() == 2);
  CHECK(g.num_edges() == 2);
  CHECK(g.total_edge_weight() == 2);
}

TEST_CASE("build_graph on a full 4x4 biclique") {
  // Oracle: enumerate all pairs.
  std::vector<InteractionRecord> records;
  std::size_t expected_edges = 0;
  for (int q = 0; q < 4; ++q)
    for (int d = 0; d < 4; ++d) {
      records.push_back(rec("q" + std::to_string(q), "d" + std::to_string(d), 1));
      ++expected_edges;
    }
  auto g = build_graph(records);
  CHECK(g.num_edges() == expected_edges);
  CHECK(g.total_edge_weight() == expected_edges);
  for (std::uint32_t q = 0; q < 4; ++q) CHECK(g.degree(q) == 4);
}

TEST_CASE("build_graph rejects overlapping id namespaces") {
  CHECK_THROWS_AS(build_graph({rec("x", "x", 1)}), DataError);
  CHECK_THROWS_AS(build_graph({}), DataError);
}

TEST_CASE("graphs from shuffled records are isomorphic") {
  auto records = test_support::random_records(12, 15, 0.25, 4, 77);
  auto shuffled = records;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  auto edge_multiset = [](const BipartiteGraph& g) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
    for (std::uint32_t q = 0; q < g.num_queries(); ++q) {
      auto nbrs = g.neighbors(q);
      auto ws = g.edge_weights(q);
      for (std::size_t i = 0; i < nbrs.size(); ++i)
        edges[{g.query_id(q), g.vertex_id(nbrs[i])}] += ws[i];
    }
    return edges;
  };
  auto a = build_graph(records);
  auto b = build_graph(shuffled);
  CHECK(edge_multiset(a) == edge_multiset(b));
  CHECK(a.total_edge_weight() == b.total_edge_weight());
}

TEST_CASE("constructed graphs are bipartite by 2-coloring") {
  auto g = build_graph(test_support::random_records(10, 10, 0.3, 3, 5));
  // color queries 0, docs 1; every edge must cross
  for (std::uint32_t v = 0; v < g.num_vertices(); ++v)
    for (std::uint32_t u : g.neighbors(v)) CHECK(g.is_query_vertex(v) != g.is_query_vertex(u));
}

TEST_CASE("cluster_affinity single cluster has empty off-diagonal") {
  auto g = build_graph(test_support::random_records(6, 6, 0.4, 2, 9));
  Partitioning p;
  p.num_clusters = 1;
  p.num_queries = g.num_queries();
  p.assignment.assign(g.num_vertices(), 0);
  auto a = cluster_affinity(g, p);
  CHECK(a.num_clusters() == 1);
  CHECK(a.off_diagonal_total() == 0);
}

TEST_CASE("cluster_affinity sees a single cross edge") {
  // two 2+2 blocks joined by one unit edge q0-d2
  auto g = build_graph({rec("q0", "d0"), rec("q0", "d1"), rec("q1", "d0"), rec("q1", "d1"),
                        rec("q2", "d2"), rec("q2", "d3"), rec("q3", "d2"), rec("q3", "d3"),
                        rec("q0", "d2")});
  Partitioning p;
  p.num_clusters = 2;
  p.num_queries = g.num_queries();
  p.assignment.assign(g.num_vertices(), 0);
  // block 1: q2,q3,d2,d3
  p.assignment[2] = p.assignment[3] = 1;
  p.assignment[g.doc_vertex(2)] = p.assignment[g.doc_vertex(3)] = 1;
  auto a = cluster_affinity(g, p);
  CHECK(a.at(0, 1) == 1);
  CHECK(a.at(1, 0) == 1);
}

TEST_CASE("cluster_affinity matches a brute-force edge scan") {
  auto g = build_graph(test_support::random_records(10, 10, 0.35, 5, 21));
  auto p = test_support::random_partitioning(g, 4, 22);
  auto a = cluster_affinity(g, p);

  // independent double loop over all edges
  std::vector<std::vector<std::uint64_t>> expect(4, std::vector<std::uint64_t>(4, 0));
  for (std::uint32_t q = 0; q < g.num_queries(); ++q) {
    auto nbrs = g.neighbors(q);
    auto ws = g.edge_weights(q);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      auto ci = p.assignment[q], cj = p.assignment[nbrs[i]];
      if (ci != cj) {
        expect[ci][cj] += ws[i];
        expect[cj][ci] += ws[i];
      }
    }
  }
  for (std::uint32_t i = 0; i < 4; ++i)
    for (std::uint32_t j = 0; j < 4; ++j)
      if (i != j) CHECK(a.at(i, j) == expect[i][j]);

  // symmetry and the cut identity
  for (std::uint32_t i = 0; i < 4; ++i)
    for (std::uint32_t j = 0; j < 4; ++j) CHECK(a.at(i, j) == a.at(j, i));
  CHECK(a.off_diagonal_total() == edge_cut(g, p));
}

TEST_CASE("cluster_affinity rejects partial coverage") {
  auto g = build_graph({rec("q0", "d0")});
  Partitioning p;
  p.num_clusters = 1;
  p.num_queries = 1;
  p.assignment.assign(1, 0);  // misses the doc vertex
  CHECK_THROWS_AS(cluster_affinity(g, p), DataError);
}

TEST_CASE("id tables round-trip through files") {
  auto g = build_graph({rec("alpha", "D9"), rec("beta", "D3")});
  auto qpath = (std::filesystem::temp_directory_path() / "qt.ids").string();
  auto dpath = (std::filesystem::temp_directory_path() / "dt.ids").string();
  save_id_tables(g, qpath, dpath);
  std::ifstream qs(qpath);
  std::string line;
  std::getline(qs, line);
  CHECK(line == "alpha");
  std::getline(qs, line);
  CHECK(line == "beta");
}

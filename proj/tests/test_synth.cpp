#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pnns/partition.hpp"
#include "pnns/synth.hpp"
#include "test_support.hpp"

using namespace pnns;

TEST_CASE("zero cross noise yields B components and a zero cut at r=B") {
  SynthConfig cfg;
  cfg.topics = 4;
  cfg.queries_per_topic = 20;
  cfg.docs_per_topic = 20;
  cfg.p_in = 0.4;
  cfg.p_out = 0.0;
  cfg.seed = 2;
  auto data = generate(cfg);
  auto g = build_graph(data.records);
  auto p = partition(g, 4, 0.1, 3);
  CHECK(edge_cut(g, p) == 0);
}

TEST_CASE("single topic generates one block") {
  SynthConfig cfg;
  cfg.topics = 1;
  cfg.queries_per_topic = 10;
  cfg.docs_per_topic = 10;
  cfg.p_in = 0.5;
  cfg.p_out = 0.0;
  cfg.seed = 4;
  auto data = generate(cfg);
  CHECK(data.num_queries() == 10);
  CHECK(data.num_docs() == 10);
  for (auto t : data.query_topic) CHECK(t == 0);
}

TEST_CASE("cross-block edge fraction matches the closed-form expectation") {
  SynthConfig cfg;
  cfg.topics = 8;
  cfg.queries_per_topic = 50;
  cfg.docs_per_topic = 50;
  cfg.p_in = 0.3;
  cfg.p_out = 0.01;
  cfg.seed = 6;
  auto data = generate(cfg);

  std::size_t cross = 0;
  for (const auto& r : data.records) {
    std::uint32_t q = std::uint32_t(std::stoul(r.query_id.substr(1)));
    std::uint32_t d = std::uint32_t(std::stoul(r.doc_id.substr(1)));
    if (data.query_topic[q] != data.doc_topic[d]) ++cross;
  }
  const double b = cfg.topics;
  double expect = cfg.p_out * (b - 1) / (cfg.p_in + cfg.p_out * (b - 1));
  double got = double(cross) / double(data.records.size());
  // 3-sigma binomial band around the expectation
  double sigma = std::sqrt(expect * (1 - expect) / double(data.records.size()));
  CHECK(std::abs(got - expect) <= 3.0 * sigma + 1e-12);
}

TEST_CASE("intra-block density dominates cross-block density") {
  SynthConfig cfg;
  cfg.topics = 6;
  cfg.queries_per_topic = 30;
  cfg.docs_per_topic = 30;
  cfg.p_in = 0.25;
  cfg.p_out = 0.02;
  cfg.seed = 8;
  auto data = generate(cfg);

  double intra_pairs = 0, cross_pairs = 0, intra_edges = 0, cross_edges = 0;
  const std::uint32_t nq = data.num_queries(), nd = data.num_docs();
  for (std::uint32_t q = 0; q < nq; ++q)
    for (std::uint32_t d = 0; d < nd; ++d)
      (data.query_topic[q] == data.doc_topic[d] ? intra_pairs : cross_pairs) += 1;
  for (const auto& r : data.records) {
    std::uint32_t q = std::uint32_t(std::stoul(r.query_id.substr(1)));
    std::uint32_t d = std::uint32_t(std::stoul(r.doc_id.substr(1)));
    (data.query_topic[q] == data.doc_topic[d] ? intra_edges : cross_edges) += 1;
  }
  double intra_density = intra_edges / intra_pairs;
  double cross_density = cross_edges > 0 ? cross_edges / cross_pairs : 0.0;
  CHECK(intra_density > cross_density * (cfg.p_in / (2 * cfg.p_out)));
}

TEST_CASE("generation is deterministic under seed") {
  SynthConfig cfg;
  cfg.topics = 3;
  cfg.queries_per_topic = 10;
  cfg.docs_per_topic = 12;
  cfg.seed = 99;
  auto a = generate(cfg);
  auto b = generate(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].query_id == b.records[i].query_id);
    CHECK(a.records[i].doc_id == b.records[i].doc_id);
    CHECK(a.records[i].weight == b.records[i].weight);
  }
  CHECK(a.query_tokens == b.query_tokens);
}

TEST_CASE("edge weights follow the shifted geometric support") {
  SynthConfig cfg;
  cfg.topics = 2;
  cfg.queries_per_topic = 30;
  cfg.docs_per_topic = 30;
  cfg.p_in = 0.5;
  cfg.p_out = 0.0;
  cfg.seed = 123;
  auto data = generate(cfg);
  double mean = 0;
  for (const auto& r : data.records) {
    CHECK(r.weight >= 1);
    mean += r.weight;
  }
  mean /= double(data.records.size());
  CHECK(mean == Catch::Approx(2.0).margin(0.15));  // geometric(1/2) shifted
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.p_in = 0.1;
  cfg.p_out = 0.2;  // p_out >= p_in
  CHECK_THROWS_AS(generate(cfg), DataError);
  SynthConfig zero;
  zero.topics = 0;
  CHECK_THROWS_AS(generate(zero), DataError);
  SynthConfig empty;
  empty.p_in = 1e-9;
  empty.p_out = 0.0;
  empty.topics = 1;
  empty.queries_per_topic = 2;
  empty.docs_per_topic = 2;
  CHECK_THROWS_AS(generate(empty), DataError);  // zero edges
}

TEST_CASE("token lists respect configured lengths and pools") {
  SynthConfig cfg;
  cfg.topics = 2;
  cfg.queries_per_topic = 5;
  cfg.docs_per_topic = 5;
  cfg.query_len = 3;
  cfg.doc_len = 8;
  cfg.seed = 5;
  auto data = generate(cfg);
  for (const auto& t : data.query_tokens) CHECK(t.size() == 3);
  for (const auto& t : data.doc_tokens) CHECK(t.size() == 8);
  // tokens come from either the topic pool (t<topic>_<i>) or noise (n<i>)
  for (std::size_t q = 0; q < data.query_tokens.size(); ++q)
    for (const auto& tok : data.query_tokens[q]) {
      bool noise = tok[0] == 'n';
      bool topical = tok.rfind("t" + std::to_string(data.query_topic[q]) + "_", 0) == 0;
      CHECK((noise || topical));
    }
}

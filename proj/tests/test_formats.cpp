#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "pnns/sampler.hpp"
#include "pnns/synth.hpp"
#include "pnns/vectors.hpp"
#include "test_support.hpp"

using namespace pnns;

namespace {
std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("VEC1 header layout is bit-exact") {
  VectorSet vs;
  vs.dim = 2;
  vs.append(7, std::vector<float>{1.5f, -2.f});
  auto path = temp_file("layout.vec");
  save_vectors(vs, path);

  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 4 + 8 + 4 + 4 + (8 + 2 * 4));
  CHECK(std::memcmp(bytes.data(), "VEC1", 4) == 0);
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 4, 4);
  CHECK(version == 1);  // little-endian u32
  std::uint64_t count;
  std::memcpy(&count, bytes.data() + 8, 8);
  CHECK(count == 1);
  std::uint32_t dim, idw;
  std::memcpy(&dim, bytes.data() + 16, 4);
  std::memcpy(&idw, bytes.data() + 20, 4);
  CHECK(dim == 2);
  CHECK(idw == 8);
  std::uint64_t id;
  std::memcpy(&id, bytes.data() + 24, 8);
  CHECK(id == 7);
  float v0;
  std::memcpy(&v0, bytes.data() + 32, 4);
  CHECK(v0 == 1.5f);
}

TEST_CASE("VEC1 round-trips vectors exactly") {
  auto vs = test_support::random_vectors(37, 12, 4);
  auto path = temp_file("roundtrip.vec");
  save_vectors(vs, path);
  auto copy = load_vectors(path);
  CHECK(copy.dim == vs.dim);
  CHECK(copy.ids == vs.ids);
  CHECK(copy.data == vs.data);
}

TEST_CASE("VEC1 rejects corrupted headers") {
  auto path = temp_file("bad.vec");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_vectors(path), DataError);
  CHECK_THROWS_AS(load_vectors("/nonexistent/x.vec"), DataError);
}

TEST_CASE("VectorSet validation catches duplicates and non-finite values") {
  VectorSet dup;
  dup.dim = 1;
  dup.append(3, std::vector<float>{1.f});
  dup.append(3, std::vector<float>{2.f});
  CHECK_THROWS_AS(dup.validate(), DataError);

  VectorSet nan;
  nan.dim = 1;
  nan.append(0, std::vector<float>{std::nanf("")});
  CHECK_THROWS_AS(nan.validate(), DataError);
}

TEST_CASE("negatives dump uses the trainer interop format") {
  auto g = build_graph({test_support::rec("qq", "dd"), test_support::rec("q2", "d2")});
  std::vector<NegativePair> pairs = {{0, 1}, {1, 0}};
  auto path = temp_file("negs.tsv");
  save_negatives(g, pairs, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "qq\td2\t0");
  std::getline(in, line);
  CHECK(line == "q2\tdd\t0");
}

TEST_CASE("tokens file round-trips") {
  SynthConfig cfg;
  cfg.topics = 2;
  cfg.queries_per_topic = 4;
  cfg.docs_per_topic = 4;
  cfg.seed = 12;
  auto data = generate(cfg);
  auto path = temp_file("tokens_rt.tsv");
  save_tokens(data, path);
  auto loaded = load_tokens(path);
  for (std::size_t i = 0; i < data.query_ids.size(); ++i)
    CHECK(loaded.at(data.query_ids[i]) == data.query_tokens[i]);
  for (std::size_t i = 0; i < data.doc_ids.size(); ++i)
    CHECK(loaded.at(data.doc_ids[i]) == data.doc_tokens[i]);
}

TEST_CASE("labels file lists every entity with its planted topic") {
  SynthConfig cfg;
  cfg.topics = 3;
  cfg.queries_per_topic = 2;
  cfg.docs_per_topic = 2;
  cfg.p_in = 0.9;
  cfg.seed = 1;
  auto data = generate(cfg);
  auto path = temp_file("labels_rt.tsv");
  save_labels(data, path);
  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == data.num_queries() + data.num_docs());
}

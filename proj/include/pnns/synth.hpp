#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/interactions.hpp"

// Planted block-structure generator: B topics, dense intra-topic and sparse
// cross-topic interactions, topic-specific token pools with shared noise
// tokens. Supplies ground truth for partitioner, router, and search tests.

namespace pnns {

struct SynthConfig {
  std::uint32_t topics = 8;  // B
  std::uint32_t queries_per_topic = 50;
  std::uint32_t docs_per_topic = 50;
  double p_in = 0.3;
  double p_out = 0.01;
  std::uint32_t topic_pool = 20;  // tokens per topic pool
  std::uint32_t noise_pool = 50;  // shared noise tokens
  std::uint32_t query_len = 3;
  std::uint32_t doc_len = 8;
  double noise_prob = 0.2;  // chance a drawn token is a shared noise token
  std::uint64_t seed = 0;
};

struct SynthData {
  std::vector<InteractionRecord> records;
  std::vector<std::string> query_ids, doc_ids;                          // generation order
  std::vector<std::vector<std::string>> query_tokens, doc_tokens;       // parallel to ids
  std::vector<std::uint32_t> query_topic, doc_topic;                    // planted labels

  std::uint32_t num_queries() const { return static_cast<std::uint32_t>(query_ids.size()); }
  std::uint32_t num_docs() const { return static_cast<std::uint32_t>(doc_ids.size()); }
};

inline SynthData generate(const SynthConfig& cfg) {
  if (cfg.topics < 1) throw DataError("synth: need at least one topic");
  if (!(cfg.p_out >= 0.0 && cfg.p_out < cfg.p_in && cfg.p_in <= 1.0))
    throw DataError("synth: need 0 <= p_out < p_in <= 1");
  if (cfg.queries_per_topic < 1 || cfg.docs_per_topic < 1)
    throw DataError("synth: need at least one query and doc per topic");
  if (cfg.topic_pool < 1 || cfg.query_len < 1 || cfg.doc_len < 1)
    throw DataError("synth: token pools and lengths must be >= 1");

  std::mt19937_64 rng(cfg.seed);
  SynthData out;
  const std::uint32_t nq = cfg.topics * cfg.queries_per_topic;
  const std::uint32_t nd = cfg.topics * cfg.docs_per_topic;

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> pick_topic_token(0, cfg.topic_pool - 1);
  auto draw_tokens = [&](std::uint32_t topic, std::uint32_t len) {
    std::vector<std::string> tokens;
    tokens.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i) {
      if (cfg.noise_pool > 0 && coin(rng) < cfg.noise_prob) {
        std::uniform_int_distribution<std::uint32_t> pick_noise(0, cfg.noise_pool - 1);
        tokens.push_back("n" + std::to_string(pick_noise(rng)));
      } else {
        tokens.push_back("t" + std::to_string(topic) + "_" + std::to_string(pick_topic_token(rng)));
      }
    }
    return tokens;
  };

  for (std::uint32_t t = 0; t < cfg.topics; ++t)
    for (std::uint32_t i = 0; i < cfg.queries_per_topic; ++i) {
      out.query_ids.push_back("q" + std::to_string(out.query_ids.size()));
      out.query_topic.push_back(t);
      out.query_tokens.push_back(draw_tokens(t, cfg.query_len));
    }
  for (std::uint32_t t = 0; t < cfg.topics; ++t)
    for (std::uint32_t i = 0; i < cfg.docs_per_topic; ++i) {
      out.doc_ids.push_back("d" + std::to_string(out.doc_ids.size()));
      out.doc_topic.push_back(t);
      out.doc_tokens.push_back(draw_tokens(t, cfg.doc_len));
    }

  std::geometric_distribution<std::uint32_t> extra(0.5);  // weight = 1 + failures
  for (std::uint32_t q = 0; q < nq; ++q)
    for (std::uint32_t d = 0; d < nd; ++d) {
      double p = out.query_topic[q] == out.doc_topic[d] ? cfg.p_in : cfg.p_out;
      if (coin(rng) < p)
        out.records.push_back({out.query_ids[q], out.doc_ids[d], 1 + extra(rng)});
    }
  if (out.records.empty()) throw DataError("synth: configuration produced zero edges");
  return out;
}

/// labels.tsv: `entity_id<TAB>planted_topic`.
inline void save_labels(const SynthData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < data.query_ids.size(); ++i)
    out << data.query_ids[i] << '\t' << data.query_topic[i] << '\n';
  for (std::size_t i = 0; i < data.doc_ids.size(); ++i)
    out << data.doc_ids[i] << '\t' << data.doc_topic[i] << '\n';
}

/// tokens.tsv: `entity_id<TAB>space-joined tokens`.
inline void save_tokens(const SynthData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  auto dump = [&](const std::vector<std::string>& ids, const std::vector<std::vector<std::string>>& tokens) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out << ids[i] << '\t';
      for (std::size_t j = 0; j < tokens[i].size(); ++j) {
        if (j) out << ' ';
        out << tokens[i][j];
      }
      out << '\n';
    }
  };
  dump(data.query_ids, data.query_tokens);
  dump(data.doc_ids, data.doc_tokens);
}

inline std::unordered_map<std::string, std::vector<std::string>> load_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tokens file: " + path);
  std::unordered_map<std::string, std::vector<std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected `entity_id<TAB>tokens`");
    std::vector<std::string> tokens;
    for (auto part : detail::split(cols[1], ' '))
      if (!part.empty()) tokens.emplace_back(part);
    out[std::string(cols[0])] = std::move(tokens);
  }
  return out;
}

}  // namespace pnns

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pnns/adam.hpp"
#include "pnns/common.hpp"
#include "pnns/serial.hpp"
#include "pnns/vectors.hpp"
#include "pnns/vocab.hpp"

// Two-tower embedding model with a shared token table: both towers average
// their token rows and L2-normalize, so the dot product of the towers is a
// cosine similarity in [-1, 1]. Trained with the squared hinge loss.

namespace pnns {

/// y*min(0, yhat - t1)^2 + (1-y)*max(0, yhat - t2)^2
template <typename S>
inline S squared_hinge_loss(S yhat, int y, S t1, S t2) {
  if (t2 >= t1) throw DataError("squared_hinge_loss: need t2 < t1");
  if (y != 0) {
    S m = std::min(S(0), yhat - t1);
    return m * m;
  }
  S m = std::max(S(0), yhat - t2);
  return m * m;
}

/// dL/dyhat; subgradient 0 exactly at the hinge kinks.
template <typename S>
inline S squared_hinge_grad(S yhat, int y, S t1, S t2) {
  if (t2 >= t1) throw DataError("squared_hinge_grad: need t2 < t1");
  if (y != 0) return yhat < t1 ? S(2) * (yhat - t1) : S(0);
  return yhat > t2 ? S(2) * (yhat - t2) : S(0);
}

template <typename S = float>
struct EmbeddingModel {
  std::uint32_t dim = 32;
  TokenVocab vocab;
  std::vector<S> table;  // vocab.size() x dim, row-major

  std::span<const S> table_row(std::uint32_t r) const { return {table.data() + std::size_t(r) * dim, dim}; }

  /// Average of the feature rows, L2-normalized to a unit vector.
  std::vector<S> encode_features(std::span<const std::uint32_t> feats) const {
    if (feats.empty()) throw DataError("encode: empty token list");
    std::vector<S> x(dim, S(0));
    for (std::uint32_t f : feats) {
      auto row = table_row(f);
      for (std::uint32_t d = 0; d < dim; ++d) x[d] += row[d];
    }
    const S inv_n = S(1) / S(feats.size());
    for (S& v : x) v *= inv_n;
    S norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), S(0)));
    if (norm > S(0))
      for (S& v : x) v /= norm;
    return x;
  }

  std::vector<S> encode(const std::vector<std::string>& tokens) const {
    auto feats = vocab.features(tokens);
    return encode_features(feats);
  }
};

/// Checkpoint: magic `EMB1`, u32 vocab size, u32 l, row-major f32 LE.
template <typename S>
inline void save_model(const EmbeddingModel<S>& m, const std::string& path) {
  auto os = detail::open_binary_out(path);
  detail::write_magic(os, "EMB1");
  detail::write_u32(os, m.vocab.size());
  detail::write_u32(os, m.dim);
  for (S v : m.table) detail::write_f32(os, float(v));
  if (!os) throw DataError("write failed: " + path);
}

/// Restores table weights; the vocab itself is refit from data by callers.
template <typename S>
inline void load_model_table(EmbeddingModel<S>& m, const std::string& path) {
  auto is = detail::open_binary_in(path);
  detail::expect_magic(is, "EMB1", path);
  std::uint32_t vocab_size = detail::read_u32(is);
  std::uint32_t dim = detail::read_u32(is);
  if (vocab_size != m.vocab.size() || dim != m.dim)
    throw DataError(path + ": checkpoint shape (" + std::to_string(vocab_size) + "x" + std::to_string(dim) +
                    ") does not match model");
  m.table.resize(std::size_t(vocab_size) * dim);
  for (auto& v : m.table) v = S(detail::read_f32(is));
}

enum class NegativeMode { kRandom, kGraph };

struct TrainConfig {
  std::uint32_t dim = 32;
  std::uint32_t batch_size = 256;
  AdamConfig adam;
  double t1 = 0.9;
  double t2 = 0.2;
  std::uint32_t epochs = 4;
  std::uint64_t seed = 0;
  NegativeMode negatives = NegativeMode::kRandom;
  std::uint32_t window = 5;        // w, graph mode
  std::uint64_t neg_budget = 256;  // t, negatives per batch
  double random_mix = 0.0;         // fraction of extra uniform negatives mixed in
  VocabConfig vocab;
};

struct TrainData {
  std::vector<std::vector<std::string>> query_tokens;
  std::vector<std::vector<std::string>> doc_tokens;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positives;  // (query idx, doc idx)
};

/// Supplies (query, doc) negative pairs for a batch of queries.
class NegativeProvider {
 public:
  virtual ~NegativeProvider() = default;
  virtual std::vector<std::pair<std::uint32_t, std::uint32_t>> sample(
      std::span<const std::uint32_t> batch_queries, std::uint64_t budget, std::uint64_t seed) = 0;
};

/// Uniform random documents; exact positives are rejected so both negative
/// arms train on true negatives only.
class RandomNegatives final : public NegativeProvider {
 public:
  RandomNegatives(std::uint32_t num_docs, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& positives)
      : num_docs_(num_docs) {
    positive_.reserve(positives.size());
    for (auto [q, d] : positives) positive_.insert((std::uint64_t(q) << 32) | d);
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> sample(std::span<const std::uint32_t> batch_queries,
                                                              std::uint64_t budget,
                                                              std::uint64_t seed) override {
    if (batch_queries.empty() || budget == 0) return {};
    std::mt19937_64 rng(seed);
    const std::uint64_t per_query = (budget + batch_queries.size() - 1) / batch_queries.size();
    std::uniform_int_distribution<std::uint32_t> pick(0, num_docs_ - 1);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(batch_queries.size() * per_query);
    for (std::uint32_t q : batch_queries)
      for (std::uint64_t i = 0; i < per_query; ++i) {
        for (int attempt = 0; attempt < 64; ++attempt) {
          std::uint32_t d = pick(rng);
          if (positive_.count((std::uint64_t(q) << 32) | d)) continue;
          out.emplace_back(q, d);
          break;
        }
      }
    return out;
  }

 private:
  std::uint32_t num_docs_;
  std::unordered_set<std::uint64_t> positive_;
};

namespace detail {

// Backprop through normalize(mean(rows)): given dL/du where u = x/|x|,
// returns dL/dx = (dL/du - u (u . dL/du)) / |x| and scatters into the rows.
template <typename S>
inline void scatter_encode_grad(std::span<const std::uint32_t> feats, std::span<const S> unit,
                                S norm, std::span<const S> gu, std::uint32_t dim,
                                std::vector<S>& table_grad) {
  const std::size_t n = feats.size();
  S proj = S(0);
  for (std::uint32_t d = 0; d < dim; ++d) proj += unit[d] * gu[d];
  const S inv_norm = norm > S(0) ? S(1) / norm : S(1);
  const S inv_n = S(1) / S(n);
  for (std::uint32_t f : feats) {
    S* row = table_grad.data() + std::size_t(f) * dim;
    for (std::uint32_t d = 0; d < dim; ++d)
      row[d] += (gu[d] - unit[d] * proj) * inv_norm * inv_n;
  }
}

// Forward pass keeping the pre-normalization norm for the backward pass.
template <typename S>
inline std::pair<std::vector<S>, S> encode_with_norm(const EmbeddingModel<S>& m,
                                                     std::span<const std::uint32_t> feats) {
  std::vector<S> x(m.dim, S(0));
  for (std::uint32_t f : feats) {
    auto row = m.table_row(f);
    for (std::uint32_t d = 0; d < m.dim; ++d) x[d] += row[d];
  }
  const S inv_n = S(1) / S(feats.size());
  for (S& v : x) v *= inv_n;
  S norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), S(0)));
  if (norm > S(0))
    for (S& v : x) v /= norm;
  return {std::move(x), norm};
}

}  // namespace detail

struct TrainResult {
  std::vector<double> epoch_loss;
};

/// One forward/backward over a batch of labeled (query, doc) pairs.
/// Returns the mean loss; gradients are accumulated into table_grad.
template <typename S>
inline S train_batch_loss(const EmbeddingModel<S>& m,
                          const std::vector<std::vector<std::uint32_t>>& query_feats,
                          const std::vector<std::vector<std::uint32_t>>& doc_feats,
                          std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs,
                          std::span<const int> labels, S t1, S t2, std::vector<S>& table_grad) {
  S total = S(0);
  const S inv_b = S(1) / S(pairs.size());
  std::vector<S> gu(m.dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& qf = query_feats[pairs[i].first];
    const auto& df = doc_feats[pairs[i].second];
    auto [qu, qnorm] = detail::encode_with_norm(m, qf);
    auto [du, dnorm] = detail::encode_with_norm(m, df);
    S yhat = S(0);
    for (std::uint32_t d = 0; d < m.dim; ++d) yhat += qu[d] * du[d];
    // the hinge's min/max would silently swallow a NaN similarity
    if (!std::isfinite(double(yhat))) return std::numeric_limits<S>::quiet_NaN();
    total += squared_hinge_loss(yhat, labels[i], t1, t2);
    S g = squared_hinge_grad(yhat, labels[i], t1, t2) * inv_b;
    if (g != S(0)) {
      for (std::uint32_t d = 0; d < m.dim; ++d) gu[d] = g * du[d];
      detail::scatter_encode_grad<S>(qf, qu, qnorm, gu, m.dim, table_grad);
      for (std::uint32_t d = 0; d < m.dim; ++d) gu[d] = g * qu[d];
      detail::scatter_encode_grad<S>(df, du, dnorm, gu, m.dim, table_grad);
    }
  }
  return total * inv_b;
}

/// Minibatch training with Adam. Each batch holds a slice of the positives
/// plus provider-supplied negatives labeled 0. Deterministic under seed.
template <typename S = float>
inline EmbeddingModel<S> train(const TrainData& data, const TrainConfig& cfg,
                               NegativeProvider* negatives, TrainResult* result = nullptr) {
  if (data.positives.empty()) throw DataError("train: empty dataset");
  if (!(cfg.t2 >= 0.0 && cfg.t2 < cfg.t1 && cfg.t1 <= 1.0))
    throw DataError("train: need 0 <= t2 < t1 <= 1");

  EmbeddingModel<S> m;
  m.dim = cfg.dim;
  {
    std::vector<std::vector<std::string>> all_tokens = data.query_tokens;
    all_tokens.insert(all_tokens.end(), data.doc_tokens.begin(), data.doc_tokens.end());
    m.vocab = TokenVocab::fit(all_tokens, cfg.vocab);
  }
  const std::size_t params = std::size_t(m.vocab.size()) * cfg.dim;
  m.table.resize(params);
  {
    std::mt19937_64 rng(cfg.seed);
    const double limit = std::sqrt(6.0 / (double(m.vocab.size()) + double(cfg.dim)));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (auto& v : m.table) v = S(u(rng));
  }

  std::vector<std::vector<std::uint32_t>> query_feats(data.query_tokens.size());
  std::vector<std::vector<std::uint32_t>> doc_feats(data.doc_tokens.size());
  for (std::size_t i = 0; i < query_feats.size(); ++i) query_feats[i] = m.vocab.features(data.query_tokens[i]);
  for (std::size_t i = 0; i < doc_feats.size(); ++i) doc_feats[i] = m.vocab.features(data.doc_tokens[i]);

  Adam<S> opt(params, cfg.adam);
  std::vector<S> grad(params, S(0));
  std::vector<std::uint32_t> order(data.positives.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t batch_counter = 0;
  std::unique_ptr<RandomNegatives> mixer;
  if (cfg.random_mix > 0.0)
    mixer = std::make_unique<RandomNegatives>(static_cast<std::uint32_t>(data.doc_tokens.size()),
                                              data.positives);

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(cfg.seed * 1315423911ull + epoch + 1);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
      std::vector<int> labels;
      std::vector<std::uint32_t> batch_queries;
      {
        std::unordered_set<std::uint32_t> seen;
        for (std::size_t i = start; i < end; ++i) {
          auto [q, d] = data.positives[order[i]];
          pairs.emplace_back(q, d);
          labels.push_back(1);
          if (seen.insert(q).second) batch_queries.push_back(q);
        }
      }
      if (negatives) {
        std::uint64_t budget = cfg.neg_budget;
        auto neg = negatives->sample(batch_queries, budget, cfg.seed ^ (0x9e3779b97f4a7c15ull * ++batch_counter));
        for (auto [q, d] : neg) {
          pairs.emplace_back(q, d);
          labels.push_back(0);
        }
        // optional uniform negatives mixed into the batch (0 = pure sampler)
        if (cfg.random_mix > 0.0 && mixer) {
          std::uint64_t extra = static_cast<std::uint64_t>(double(budget) * cfg.random_mix);
          if (extra > 0) {
            auto mixed = mixer->sample(batch_queries, extra,
                                       cfg.seed ^ (0xc2b2ae3d27d4eb4full * batch_counter));
            for (auto [q, d] : mixed) {
              pairs.emplace_back(q, d);
              labels.push_back(0);
            }
          }
        }
      }
      std::fill(grad.begin(), grad.end(), S(0));
      S loss = train_batch_loss<S>(m, query_feats, doc_feats, pairs, labels, S(cfg.t1), S(cfg.t2), grad);
      if (!std::isfinite(double(loss)))
        throw DataError("train: loss diverged (non-finite) at epoch " + std::to_string(epoch) +
                        ", batch " + std::to_string(batches));
      opt.step(m.table, grad);
      epoch_loss += double(loss);
      ++batches;
    }
    if (result) result->epoch_loss.push_back(batches ? epoch_loss / double(batches) : 0.0);
  }
  return m;
}

struct MatchingMetrics {
  double map = 0.0;
  double recall = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// Ranks the corpus by cosine for each query and scores the purchased set at
/// cutoff k. Queries with no purchased docs are skipped and counted.
template <typename S>
inline MatchingMetrics evaluate_matching(const EmbeddingModel<S>& model,
                                         const std::vector<std::vector<std::string>>& query_tokens,
                                         const std::vector<std::vector<std::uint32_t>>& purchased,
                                         const std::vector<std::vector<std::string>>& doc_tokens,
                                         std::size_t k) {
  MatchingMetrics out;
  const std::size_t m = doc_tokens.size();
  std::vector<std::vector<S>> doc_vecs(m);
  for (std::size_t d = 0; d < m; ++d) doc_vecs[d] = model.encode(doc_tokens[d]);

  double map_total = 0.0, recall_total = 0.0;
  for (std::size_t qi = 0; qi < query_tokens.size(); ++qi) {
    if (purchased[qi].empty()) {
      ++out.skipped;
      continue;
    }
    auto q = model.encode(query_tokens[qi]);
    std::vector<std::pair<S, std::uint32_t>> scored(m);
    for (std::size_t d = 0; d < m; ++d) {
      S s = S(0);
      for (std::uint32_t j = 0; j < model.dim; ++j) s += q[j] * doc_vecs[d][j];
      scored[d] = {s, static_cast<std::uint32_t>(d)};
    }
    const std::size_t cut = std::min(k, m);
    std::partial_sort(scored.begin(), scored.begin() + std::ptrdiff_t(cut), scored.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    std::unordered_set<std::uint32_t> rel(purchased[qi].begin(), purchased[qi].end());
    std::size_t hits = 0;
    double ap = 0.0;
    for (std::size_t rank = 0; rank < cut; ++rank)
      if (rel.count(scored[rank].second)) {
        ++hits;
        ap += double(hits) / double(rank + 1);
      }
    const double denom = double(std::min(rel.size(), k));
    map_total += ap / denom;
    recall_total += double(hits) / double(rel.size());
    ++out.evaluated;
  }
  if (out.evaluated > 0) {
    out.map = map_total / double(out.evaluated);
    out.recall = recall_total / double(out.evaluated);
  }
  return out;
}

/// Exports encoded entities as VEC1 rows (ids are the dense entity indices).
template <typename S>
inline VectorSet export_embeddings(const EmbeddingModel<S>& model,
                                   const std::vector<std::vector<std::string>>& token_lists) {
  VectorSet vs;
  vs.dim = model.dim;
  std::vector<float> row(model.dim);
  for (std::size_t i = 0; i < token_lists.size(); ++i) {
    auto v = model.encode(token_lists[i]);
    for (std::uint32_t d = 0; d < model.dim; ++d) row[d] = float(v[d]);
    vs.append(i, row);
  }
  return vs;
}

}  // namespace pnns

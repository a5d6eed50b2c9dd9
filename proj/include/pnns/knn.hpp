#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/serial.hpp"
#include "pnns/vectors.hpp"

// Pluggable KNN backends behind one interface: exact brute force and an
// inverted-file (IVF) cell-probe index with a k-means coarse quantizer.
// Similarity is cosine: vectors are normalized at ingest, math is dot product.

namespace pnns {

struct SearchHit {
  std::uint64_t id = 0;
  float score = 0.f;
};

inline bool hit_before(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

struct BuildStats {
  double seconds = 0.0;
  std::size_t memory_bytes = 0;
};

class SearchIndex {
 public:
  virtual ~SearchIndex() = default;
  virtual std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const = 0;
  virtual std::size_t size() const = 0;
  virtual std::uint32_t dim() const = 0;
  virtual std::string_view kind() const = 0;
  virtual const BuildStats& build_stats() const = 0;
  /// Persists backend-specific sidecar files under `prefix`; the vectors
  /// themselves are stored separately as VEC1.
  virtual void save_aux(const std::string& prefix) const = 0;
};

namespace detail {

inline std::vector<SearchHit> top_k(std::vector<SearchHit>& candidates, std::size_t k) {
  k = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + std::ptrdiff_t(k), candidates.end(),
                    hit_before);
  candidates.resize(k);
  return std::move(candidates);
}

inline std::vector<float> normalized_copy(std::span<const float> v) {
  std::vector<float> q(v.begin(), v.end());
  normalize_in_place(q);
  return q;
}

}  // namespace detail

/// Exact top-k by cosine similarity, ties broken by lower id. This is the
/// oracle for all recall measurement.
inline std::vector<SearchHit> brute_force_search(const VectorSet& vs, std::span<const float> query,
                                                 std::size_t k) {
  if (k < 1) throw DataError("brute_force_search: k must be >= 1");
  if (query.size() != vs.dim) throw DataError("brute_force_search: dimension mismatch");
  auto q = detail::normalized_copy(query);
  std::vector<SearchHit> hits;
  hits.reserve(vs.count());
  std::vector<float> row(vs.dim);
  for (std::size_t i = 0; i < vs.count(); ++i) {
    auto r = vs.row(i);
    std::copy(r.begin(), r.end(), row.begin());
    normalize_in_place(row);
    hits.push_back({vs.ids[i], dot(q, row)});
  }
  return detail::top_k(hits, k);
}

class BruteForceIndex final : public SearchIndex {
 public:
  explicit BruteForceIndex(const VectorSet& vs) : dim_(vs.dim), ids_(vs.ids), data_(vs.data) {
    Stopwatch timer;
    for (std::size_t i = 0; i < ids_.size(); ++i)
      normalize_in_place({data_.data() + i * dim_, dim_});
    stats_.seconds = timer.seconds();
    stats_.memory_bytes = data_.size() * sizeof(float) + ids_.size() * sizeof(std::uint64_t);
  }

  std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const override {
    if (k < 1) throw DataError("search: k must be >= 1");
    if (query.size() != dim_) throw DataError("search: dimension mismatch");
    auto q = detail::normalized_copy(query);
    std::vector<SearchHit> hits;
    hits.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i)
      hits.push_back({ids_[i], dot(q, {data_.data() + i * dim_, dim_})});
    return detail::top_k(hits, k);
  }

  std::size_t size() const override { return ids_.size(); }
  std::uint32_t dim() const override { return dim_; }
  std::string_view kind() const override { return "brute"; }
  const BuildStats& build_stats() const override { return stats_; }
  void save_aux(const std::string&) const override {}

 private:
  std::uint32_t dim_;
  std::vector<std::uint64_t> ids_;
  std::vector<float> data_;  // normalized rows
  BuildStats stats_;
};

struct IvfParams {
  std::uint32_t nlist = 64;
  std::uint32_t nprobe = 8;
  std::uint32_t kmeans_iters = 20;
  std::uint64_t seed = 0;
};

namespace detail {

inline float l2_sq(std::span<const float> a, std::span<const float> b) {
  float s = 0.f;
  for (std::size_t i = 0; i < a.size(); ++i) {
    float d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Lloyd's with k-means++ seeding on the (already normalized) rows. Empty
// clusters are repaired by stealing the farthest vector from the largest one.
inline std::vector<float> kmeans(std::span<const float> data, std::size_t count, std::uint32_t dim,
                                 std::uint32_t k, std::uint32_t iters, std::uint64_t seed,
                                 std::vector<std::uint32_t>& assignment) {
  std::mt19937_64 rng(seed);
  auto row = [&](std::size_t i) { return std::span<const float>(data.data() + i * dim, dim); };

  std::vector<float> centroids(std::size_t(k) * dim);
  auto centroid = [&](std::uint32_t c) { return std::span<float>(centroids.data() + std::size_t(c) * dim, dim); };

  // k-means++ seeding
  std::vector<float> min_d2(count, std::numeric_limits<float>::max());
  {
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    std::size_t first = pick(rng);
    std::copy(row(first).begin(), row(first).end(), centroid(0).begin());
    for (std::uint32_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        float d2 = l2_sq(row(i), centroid(c - 1));
        min_d2[i] = std::min(min_d2[i], d2);
        total += min_d2[i];
      }
      std::size_t chosen = 0;
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng), acc = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
          acc += min_d2[i];
          if (acc >= target) {
            chosen = i;
            break;
          }
        }
      } else {
        std::uniform_int_distribution<std::size_t> any(0, count - 1);
        chosen = any(rng);
      }
      std::copy(row(chosen).begin(), row(chosen).end(), centroid(c).begin());
    }
  }

  assignment.assign(count, 0);
  std::vector<std::uint32_t> sizes(k, 0);
  for (std::uint32_t iter = 0; iter < iters; ++iter) {
    for (std::size_t i = 0; i < count; ++i) {
      float best = std::numeric_limits<float>::max();
      std::uint32_t best_c = 0;
      for (std::uint32_t c = 0; c < k; ++c) {
        float d2 = l2_sq(row(i), centroid(c));
        if (d2 < best) {
          best = d2;
          best_c = c;
        }
      }
      assignment[i] = best_c;
    }
    std::fill(centroids.begin(), centroids.end(), 0.f);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      auto ctr = centroid(assignment[i]);
      auto r = row(i);
      for (std::uint32_t d = 0; d < dim; ++d) ctr[d] += r[d];
      ++sizes[assignment[i]];
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      auto ctr = centroid(c);
      float inv = 1.f / float(sizes[c]);
      for (std::uint32_t d = 0; d < dim; ++d) ctr[d] *= inv;
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::uint32_t largest = std::uint32_t(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      float far_d2 = -1.f;
      std::size_t far_i = 0;
      for (std::size_t i = 0; i < count; ++i) {
        if (assignment[i] != largest) continue;
        float d2 = l2_sq(row(i), centroid(largest));
        if (d2 > far_d2) {
          far_d2 = d2;
          far_i = i;
        }
      }
      std::copy(row(far_i).begin(), row(far_i).end(), centroid(c).begin());
      assignment[far_i] = c;
      --sizes[largest];
      ++sizes[c];
    }
  }
  // Final assignment against the settled centroids.
  for (std::size_t i = 0; i < count; ++i) {
    float best = std::numeric_limits<float>::max();
    std::uint32_t best_c = 0;
    for (std::uint32_t c = 0; c < k; ++c) {
      float d2 = l2_sq(row(i), centroid(c));
      if (d2 < best) {
        best = d2;
        best_c = c;
      }
    }
    assignment[i] = best_c;
  }
  return centroids;
}

}  // namespace detail

/// Inverted-file index: k-means coarse quantizer over normalized vectors,
/// one inverted list per centroid, exact rerank within scanned lists.
class IvfIndex final : public SearchIndex {
 public:
  IvfIndex(const VectorSet& vs, const IvfParams& params)
      : dim_(vs.dim), params_(params), ids_(vs.ids), data_(vs.data) {
    if (params.nlist < 1 || params.nlist > vs.count())
      throw DataError("ivf_build: need 1 <= nlist <= vector count");
    if (params.nprobe < 1 || params.nprobe > params.nlist)
      throw DataError("ivf_build: need 1 <= nprobe <= nlist");
    Stopwatch timer;
    for (std::size_t i = 0; i < ids_.size(); ++i)
      normalize_in_place({data_.data() + i * dim_, dim_});
    std::vector<std::uint32_t> assignment;
    centroids_ = detail::kmeans(data_, ids_.size(), dim_, params.nlist, params.kmeans_iters,
                                params.seed, assignment);
    lists_.assign(params.nlist, {});
    for (std::size_t i = 0; i < assignment.size(); ++i)
      lists_[assignment[i]].push_back(static_cast<std::uint32_t>(i));
    stats_.seconds = timer.seconds();
    stats_.memory_bytes = data_.size() * sizeof(float) + ids_.size() * (sizeof(std::uint64_t) + 4) +
                          centroids_.size() * sizeof(float);
  }

  /// Restores a previously built index from its persisted quantizer; no
  /// k-means is rerun.
  IvfIndex(const VectorSet& vs, const IvfParams& params, VectorSet centroids,
           const std::vector<std::pair<std::uint64_t, std::uint64_t>>& membership)
      : dim_(vs.dim), params_(params), ids_(vs.ids), data_(vs.data) {
    centroids_.assign(centroids.data.begin(), centroids.data.end());
    lists_.assign(centroids.count(), {});
    std::unordered_map<std::uint64_t, std::uint32_t> row_of;
    row_of.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) row_of[ids_[i]] = static_cast<std::uint32_t>(i);
    for (auto [id, list] : membership) {
      auto it = row_of.find(id);
      if (it == row_of.end()) throw DataError("ivf load: membership id not in vector set");
      if (list >= lists_.size()) throw DataError("ivf load: list id out of range");
      lists_[list].push_back(it->second);
    }
    for (std::size_t i = 0; i < ids_.size(); ++i)
      normalize_in_place({data_.data() + i * dim_, dim_});
  }

  std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const override {
    return search_with_probes(query, k, params_.nprobe);
  }

  std::vector<SearchHit> search_with_probes(std::span<const float> query, std::size_t k,
                                            std::uint32_t nprobe) const {
    if (k < 1) throw DataError("search: k must be >= 1");
    if (query.size() != dim_) throw DataError("search: dimension mismatch");
    if (nprobe < 1 || nprobe > nlist()) throw DataError("search: need 1 <= nprobe <= nlist");
    auto q = detail::normalized_copy(query);
    std::vector<std::pair<float, std::uint32_t>> order(nlist());
    for (std::uint32_t c = 0; c < nlist(); ++c)
      order[c] = {detail::l2_sq(q, {centroids_.data() + std::size_t(c) * dim_, dim_}), c};
    std::partial_sort(order.begin(), order.begin() + nprobe, order.end());
    std::vector<SearchHit> hits;
    for (std::uint32_t p = 0; p < nprobe; ++p)
      for (std::uint32_t i : lists_[order[p].second])
        hits.push_back({ids_[i], dot(q, {data_.data() + std::size_t(i) * dim_, dim_})});
    return detail::top_k(hits, k);
  }

  std::size_t size() const override { return ids_.size(); }
  std::uint32_t dim() const override { return dim_; }
  std::uint32_t nlist() const { return static_cast<std::uint32_t>(lists_.size()); }
  std::string_view kind() const override { return "ivf"; }
  const BuildStats& build_stats() const override { return stats_; }
  const std::vector<std::vector<std::uint32_t>>& lists() const { return lists_; }

  /// Centroids as VEC1 (`<prefix>.centroids.vec`) plus the membership file
  /// (`<prefix>.lists`): u64 pair count, then (vector id, list id) u64 pairs.
  void save_aux(const std::string& prefix) const override {
    VectorSet cs;
    cs.dim = dim_;
    for (std::uint32_t c = 0; c < nlist(); ++c)
      cs.append(c, {centroids_.data() + std::size_t(c) * dim_, dim_});
    save_vectors(cs, prefix + ".centroids.vec");
    auto os = detail::open_binary_out(prefix + ".lists");
    detail::write_u64(os, ids_.size());
    for (std::uint32_t list = 0; list < nlist(); ++list)
      for (std::uint32_t i : lists_[list]) {
        detail::write_u64(os, ids_[i]);
        detail::write_u64(os, list);
      }
  }

  static std::vector<std::pair<std::uint64_t, std::uint64_t>> load_membership(const std::string& path) {
    auto is = detail::open_binary_in(path);
    std::uint64_t count = detail::read_u64(is);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out(count);
    for (auto& [id, list] : out) {
      id = detail::read_u64(is);
      list = detail::read_u64(is);
    }
    return out;
  }

 private:
  std::uint32_t dim_;
  IvfParams params_;
  std::vector<std::uint64_t> ids_;
  std::vector<float> data_;  // normalized rows
  std::vector<float> centroids_;
  std::vector<std::vector<std::uint32_t>> lists_;
  BuildStats stats_;
};

enum class BackendKind { kBruteForce, kIvf };

inline BackendKind backend_from_string(std::string_view s) {
  if (s == "brute") return BackendKind::kBruteForce;
  if (s == "ivf") return BackendKind::kIvf;
  throw DataError("unknown backend '" + std::string(s) + "' (expected: brute, ivf)");
}

inline std::string_view backend_name(BackendKind kind) {
  return kind == BackendKind::kBruteForce ? "brute" : "ivf";
}

inline std::unique_ptr<SearchIndex> make_index(BackendKind kind, const VectorSet& vs,
                                               const IvfParams& params) {
  if (kind == BackendKind::kBruteForce) return std::make_unique<BruteForceIndex>(vs);
  IvfParams p = params;
  p.nlist = std::min<std::uint32_t>(p.nlist, static_cast<std::uint32_t>(std::max<std::size_t>(vs.count(), 1)));
  p.nprobe = std::min(p.nprobe, p.nlist);
  return std::make_unique<IvfIndex>(vs, p);
}

inline std::unique_ptr<SearchIndex> ivf_build(const VectorSet& vs, const IvfParams& params) {
  return std::make_unique<IvfIndex>(vs, params);
}

inline std::vector<SearchHit> ivf_search(const SearchIndex& index, std::span<const float> query,
                                         std::size_t k, std::uint32_t nprobe) {
  auto* ivf = dynamic_cast<const IvfIndex*>(&index);
  if (!ivf) throw DataError("ivf_search: index is not an IVF index");
  return ivf->search_with_probes(query, k, nprobe);
}

}  // namespace pnns

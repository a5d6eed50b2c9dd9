#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/knn.hpp"
#include "pnns/partitioning.hpp"
#include "pnns/router.hpp"
#include "pnns/vectors.hpp"

// Partitioned nearest neighbor search: a router picks the clusters to probe,
// a per-cluster backend index searches each probed cluster, and the results
// merge into a global top-k.

namespace pnns {

struct PnnsBuildOptions {
  BackendKind backend = BackendKind::kBruteForce;
  IvfParams ivf;          // per-cluster params when backend == kIvf
  unsigned jobs = 1;      // concurrent per-cluster builds
};

class PartitionedIndex {
 public:
  std::uint32_t num_clusters() const { return static_cast<std::uint32_t>(clusters_.size()); }
  std::uint32_t dim() const { return dim_; }
  std::size_t total_docs() const { return total_docs_; }
  BackendKind backend() const { return backend_; }
  double cutoff() const { return cutoff_; }
  void set_cutoff(double t) { cutoff_ = t; }

  const RouterModel<float>& router() const { return router_; }
  void set_router(RouterModel<float> r) { router_ = std::move(r); }
  bool has_router() const { return router_.num_clusters() > 0; }

  const SearchIndex* cluster_index(std::uint32_t c) const { return clusters_[c].get(); }
  const std::vector<double>& build_seconds() const { return build_seconds_; }
  std::size_t cluster_doc_count(std::uint32_t c) const { return clusters_[c] ? clusters_[c]->size() : 0; }

  struct QueryStats {
    std::vector<std::uint32_t> probed;  // effective probes, in probe order
  };

  /// Probe the router's top clusters (max d probes, cumulative probability
  /// cutoff t), search each serially, merge into a global top-k ordered by
  /// (score desc, id asc).
  std::vector<SearchHit> query(std::span<const float> q, std::size_t k, std::uint32_t d, double t,
                               QueryStats* stats = nullptr, bool parallel_probes = false) const {
    if (d < 1) throw DataError("pnns query: d must be >= 1");
    if (q.size() != dim_) throw DataError("pnns query: dimension mismatch");
    if (!has_router()) throw InvariantError("pnns query: router not set");
    auto probs = router_.predict(q);
    auto probes = top_clusters<float>(probs, std::min<std::uint32_t>(d, num_clusters()), t);
    if (stats) stats->probed = probes;

    std::vector<SearchHit> merged;
    if (!parallel_probes || probes.size() <= 1) {
      for (std::uint32_t c : probes) {
        if (!clusters_[c]) continue;
        auto hits = clusters_[c]->search(q, k);
        merged.insert(merged.end(), hits.begin(), hits.end());
      }
    } else {
      std::vector<std::vector<SearchHit>> per_probe(probes.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < probes.size(); i = next.fetch_add(1))
          if (clusters_[probes[i]]) per_probe[i] = clusters_[probes[i]]->search(q, k);
      };
      std::vector<std::thread> pool;
      unsigned n = std::min<unsigned>(std::thread::hardware_concurrency(), unsigned(probes.size()));
      for (unsigned i = 0; i < std::max(1u, n); ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
      for (auto& hits : per_probe) merged.insert(merged.end(), hits.begin(), hits.end());
    }
    return detail::top_k(merged, k);
  }

  friend PartitionedIndex build_partitioned(const VectorSet& corpus, const Partitioning& p,
                                            const PnnsBuildOptions& options);
  friend void save_partitioned(const PartitionedIndex& index, const std::string& dir);
  friend PartitionedIndex load_partitioned(const std::string& dir);

 private:
  std::uint32_t dim_ = 0;
  std::size_t total_docs_ = 0;
  BackendKind backend_ = BackendKind::kBruteForce;
  double cutoff_ = 0.99;
  std::vector<std::unique_ptr<SearchIndex>> clusters_;
  std::vector<VectorSet> cluster_vectors_;  // raw per-cluster slices, for persistence
  std::vector<double> build_seconds_;
  RouterModel<float> router_;
};

/// Splits the corpus by cluster and builds one backend index per cluster.
/// Per-cluster builds run on up to `jobs` workers; build wall time per
/// cluster is recorded for the scheduler.
inline PartitionedIndex build_partitioned(const VectorSet& corpus, const Partitioning& p,
                                          const PnnsBuildOptions& options) {
  PartitionedIndex out;
  out.dim_ = corpus.dim;
  out.backend_ = options.backend;
  const std::uint32_t r = p.num_clusters;
  out.cluster_vectors_.resize(r);
  for (auto& vs : out.cluster_vectors_) vs.dim = corpus.dim;
  for (std::size_t i = 0; i < corpus.count(); ++i) {
    std::uint64_t id = corpus.ids[i];
    if (id >= p.num_docs())
      throw DataError("build_partitioned: doc id " + std::to_string(id) + " missing from partitioning");
    out.cluster_vectors_[p.cluster_of_doc(static_cast<std::uint32_t>(id))].append(id, corpus.row(i));
  }
  out.total_docs_ = corpus.count();
  out.clusters_.resize(r);
  out.build_seconds_.assign(r, 0.0);

  std::atomic<std::uint32_t> next{0};
  auto worker = [&] {
    for (std::uint32_t c = next.fetch_add(1); c < r; c = next.fetch_add(1)) {
      const auto& vs = out.cluster_vectors_[c];
      if (vs.count() == 0) continue;
      IvfParams params = options.ivf;
      params.seed = options.ivf.seed + c;  // per-cluster determinism regardless of scheduling
      Stopwatch timer;
      out.clusters_[c] = make_index(options.backend, vs, params);
      out.build_seconds_[c] = timer.seconds();
    }
  };
  unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

inline std::vector<SearchHit> pnns_query(const PartitionedIndex& index, std::span<const float> q,
                                         std::size_t k, std::uint32_t d, double t) {
  return index.query(q, k, d, t);
}

/// recall@k against the exact result set: |S_E ∩ S_A| / |S_E|.
inline double recall_at_k(std::span<const std::uint64_t> approx, std::span<const std::uint64_t> exact) {
  if (exact.empty()) throw DataError("recall_at_k: exact result set is empty");
  std::vector<std::uint64_t> sorted_exact(exact.begin(), exact.end());
  std::sort(sorted_exact.begin(), sorted_exact.end());
  std::size_t hits = 0;
  for (std::uint64_t id : approx)
    if (std::binary_search(sorted_exact.begin(), sorted_exact.end(), id)) ++hits;
  return double(hits) / double(exact.size());
}

inline std::vector<std::uint64_t> hit_ids(const std::vector<SearchHit>& hits) {
  std::vector<std::uint64_t> ids;
  ids.reserve(hits.size());
  for (const auto& h : hits) ids.push_back(h.id);
  return ids;
}

/// Index directory layout: meta.tsv (cluster id, doc count, backend kind),
/// per-cluster cluster_<i>.vec plus backend sidecars, router.rtr, and
/// build_times.tsv (wall time; not part of the deterministic payload).
inline void save_partitioned(const PartitionedIndex& index, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream meta(fs::path(dir) / "meta.tsv");
  if (!meta) throw DataError("cannot write index meta: " + dir);
  for (std::uint32_t c = 0; c < index.num_clusters(); ++c) {
    meta << c << '\t' << index.cluster_doc_count(c) << '\t' << backend_name(index.backend_) << '\n';
    const auto& vs = index.cluster_vectors_[c];
    std::string base = (fs::path(dir) / ("cluster_" + std::to_string(c))).string();
    if (vs.count() > 0) {
      save_vectors(vs, base + ".vec");
      index.clusters_[c]->save_aux(base);
    }
  }
  std::ofstream times(fs::path(dir) / "build_times.tsv");
  for (std::uint32_t c = 0; c < index.num_clusters(); ++c)
    times << c << '\t' << index.build_seconds_[c] << '\n';
  if (index.has_router()) save_router(index.router_, (fs::path(dir) / "router.rtr").string());
}

inline PartitionedIndex load_partitioned(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream meta(fs::path(dir) / "meta.tsv");
  if (!meta) throw DataError("cannot open index meta under: " + dir);
  PartitionedIndex out;
  std::string line;
  std::vector<std::pair<std::uint64_t, std::string>> rows;  // doc count, backend
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() != 3) throw DataError("meta.tsv: expected 3 columns");
    rows.emplace_back(std::stoull(std::string(cols[1])), std::string(cols[2]));
  }
  if (rows.empty()) throw DataError("meta.tsv: no clusters");
  out.backend_ = backend_from_string(rows[0].second);
  out.clusters_.resize(rows.size());
  out.cluster_vectors_.resize(rows.size());
  out.build_seconds_.assign(rows.size(), 0.0);
  for (std::uint32_t c = 0; c < rows.size(); ++c) {
    if (rows[c].first == 0) continue;
    std::string base = (fs::path(dir) / ("cluster_" + std::to_string(c))).string();
    out.cluster_vectors_[c] = load_vectors(base + ".vec");
    const auto& vs = out.cluster_vectors_[c];
    if (out.dim_ == 0) out.dim_ = vs.dim;
    out.total_docs_ += vs.count();
    if (out.backend_ == BackendKind::kBruteForce) {
      out.clusters_[c] = std::make_unique<BruteForceIndex>(vs);
    } else {
      auto centroids = load_vectors(base + ".centroids.vec");
      auto membership = IvfIndex::load_membership(base + ".lists");
      IvfParams params;
      params.nlist = static_cast<std::uint32_t>(centroids.count());
      params.nprobe = std::min(params.nprobe, params.nlist);
      out.clusters_[c] = std::make_unique<IvfIndex>(vs, params, std::move(centroids), membership);
    }
  }
  for (auto& vs : out.cluster_vectors_)
    if (vs.dim == 0) vs.dim = out.dim_;
  auto router_path = fs::path(dir) / "router.rtr";
  if (fs::exists(router_path)) out.router_ = load_router<float>(router_path.string());
  return out;
}

}  // namespace pnns

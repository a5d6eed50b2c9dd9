#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/knn.hpp"
#include "pnns/pnns.hpp"
#include "pnns/scheduler.hpp"
#include "pnns/vectors.hpp"

// Benchmark harness: recall@k against the exact brute-force oracle, per-query
// latency (serial, one-by-one), index build time, and simulated multi-machine
// makespans.

namespace pnns {

struct BenchConfig {
  std::vector<std::uint32_t> probes = {1, 2, 4, 8, 16};
  std::size_t k = 100;
  double cutoff = 0.99;
  std::size_t warmup = 10;  // leading queries excluded from latency stats
  std::vector<std::uint32_t> machines = {1, 2, 4, 8, 16};
};

struct BenchRow {
  std::string backend;
  std::uint32_t probes = 0;
  double cutoff = 0.99;
  std::size_t k = 100;
  double mean_recall = 0.0;
  double mean_effective_probes = 0.0;
  double latency_mean_ms = 0.0;
  double latency_p50_ms = 0.0;
  double latency_p99_ms = 0.0;
  double build_seconds = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::pair<std::uint32_t, double>> makespans;
};

namespace detail {

inline double percentile(std::vector<double> sorted_ms, double p) {
  if (sorted_ms.empty()) return 0.0;
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * double(sorted_ms.size())));
  rank = std::max<std::size_t>(rank, 1);
  return sorted_ms[rank - 1];
}

}  // namespace detail

/// Runs every probe configuration query-by-query against the exact oracle.
/// Latency wraps only the partitioned query call; the first `warmup` queries
/// are measured but excluded from the latency statistics.
inline BenchReport run_bench(const PartitionedIndex& index, const VectorSet& corpus,
                             const VectorSet& queries, const BenchConfig& cfg) {
  if (queries.count() == 0) throw DataError("bench: query set is empty");
  if (queries.dim != corpus.dim || queries.dim != index.dim())
    throw DataError("bench: dimension mismatch between corpus, queries, and index");

  // Exact oracle over the whole corpus.
  BruteForceIndex oracle(corpus);
  std::vector<std::vector<std::uint64_t>> exact(queries.count());
  for (std::size_t i = 0; i < queries.count(); ++i)
    exact[i] = hit_ids(oracle.search(queries.row(i), cfg.k));

  double total_build = 0.0;
  for (double s : index.build_seconds()) total_build += s;

  BenchReport report;
  for (std::uint32_t probes : cfg.probes) {
    BenchRow row;
    row.backend = std::string(backend_name(index.backend()));
    row.probes = probes;
    row.cutoff = cfg.cutoff;
    row.k = cfg.k;
    row.build_seconds = total_build;
    std::vector<double> latencies;
    latencies.reserve(queries.count());
    double recall_sum = 0.0, probes_sum = 0.0;
    for (std::size_t i = 0; i < queries.count(); ++i) {
      PartitionedIndex::QueryStats stats;
      Stopwatch timer;
      auto hits = index.query(queries.row(i), cfg.k, probes, cfg.cutoff, &stats);
      double ms = timer.millis();
      if (i >= cfg.warmup) latencies.push_back(ms);
      recall_sum += recall_at_k(hit_ids(hits), exact[i]);
      probes_sum += double(stats.probed.size());
    }
    row.mean_recall = recall_sum / double(queries.count());
    row.mean_effective_probes = probes_sum / double(queries.count());
    if (!latencies.empty()) {
      double sum = 0.0;
      for (double v : latencies) sum += v;
      row.latency_mean_ms = sum / double(latencies.size());
      std::sort(latencies.begin(), latencies.end());
      row.latency_p50_ms = detail::percentile(latencies, 0.50);
      row.latency_p99_ms = detail::percentile(latencies, 0.99);
    }
    report.rows.push_back(std::move(row));
  }
  report.makespans = simulate_build(index.build_seconds(), cfg.machines);
  return report;
}

/// TSV report. The latency/build columns are wall-time measurements and vary
/// run to run; everything else is deterministic under fixed seeds.
inline void write_bench_tsv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "backend\tprobes\tcutoff\tk\tmean_recall_at_k\tmean_effective_probes"
         "\tlatency_mean_ms\tlatency_p50_ms\tlatency_p99_ms\tbuild_seconds\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s\t%u\t%.6g\t%zu\t%.6f\t%.3f\t%.4f\t%.4f\t%.4f\t%.4f\n",
                  r.backend.c_str(), r.probes, r.cutoff, r.k, r.mean_recall,
                  r.mean_effective_probes, r.latency_mean_ms, r.latency_p50_ms, r.latency_p99_ms,
                  r.build_seconds);
    out << buf;
  }
}

/// Mirror of the scheduler's `(machines, makespan_seconds)` table.
inline void write_schedule_tsv(const std::vector<std::pair<std::uint32_t, double>>& makespans,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "machines\tmakespan_seconds\n";
  for (auto [m, s] : makespans) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%u\t%.6f\n", m, s);
    out << buf;
  }
}

inline void write_bench_text(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-8s %6s %7s %5s %9s %10s %10s %9s %9s %10s\n", "backend",
                "probes", "cutoff", "k", "recall", "eff.probes", "mean(ms)", "p50(ms)", "p99(ms)",
                "build(s)");
  out << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-8s %6u %7.2f %5zu %9.4f %10.2f %10.3f %9.3f %9.3f %10.3f\n",
                  r.backend.c_str(), r.probes, r.cutoff, r.k, r.mean_recall,
                  r.mean_effective_probes, r.latency_mean_ms, r.latency_p50_ms, r.latency_p99_ms,
                  r.build_seconds);
    out << buf;
  }
  out << "\nsimulated multi-machine build (LPT):\n";
  for (auto [m, s] : report.makespans) {
    std::snprintf(buf, sizeof(buf), "  machines=%-4u makespan=%.3fs\n", m, s);
    out << buf;
  }
}

}  // namespace pnns

// Command-line driver for the partitioned-search pipeline:
// gen -> partition -> train -> train-router -> build-index -> query/bench,
// plus the LPT schedule simulator and an end-to-end `pipeline` command.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pnns/affinity.hpp"
#include "pnns/bench.hpp"
#include "pnns/common.hpp"
#include "pnns/embedding.hpp"
#include "pnns/graph.hpp"
#include "pnns/graph_negatives.hpp"
#include "pnns/interactions.hpp"
#include "pnns/knn.hpp"
#include "pnns/partition.hpp"
#include "pnns/partitioning.hpp"
#include "pnns/pipeline.hpp"
#include "pnns/pnns.hpp"
#include "pnns/router.hpp"
#include "pnns/sampler.hpp"
#include "pnns/scheduler.hpp"
#include "pnns/synth.hpp"
#include "pnns/vectors.hpp"

namespace fs = std::filesystem;
using namespace pnns;

namespace {

std::vector<std::string> load_id_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open id table: " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) ids.push_back(line);
  while (!ids.empty() && ids.back().empty()) ids.pop_back();
  return ids;
}

// Doc-side Partitioning from a label file plus the doc id table; the
// assignment is indexed by dense doc id.
Partitioning doc_partitioning(const PartitionLabels& labels, const std::vector<std::string>& doc_ids) {
  Partitioning p;
  p.num_clusters = labels.num_clusters;
  p.eps = labels.eps;
  p.seed = labels.seed;
  p.num_queries = 0;
  p.assignment.resize(doc_ids.size());
  for (std::size_t d = 0; d < doc_ids.size(); ++d) {
    auto it = labels.cluster_of.find(doc_ids[d]);
    if (it == labels.cluster_of.end())
      throw DataError("doc '" + doc_ids[d] + "' missing from partitioning");
    p.assignment[d] = it->second;
  }
  return p;
}

void write_metrics(std::ostream& out, const std::string& arm, const TrainArtifacts& a) {
  char buf[256];
  double final_loss = a.history.epoch_loss.empty() ? 0.0 : a.history.epoch_loss.back();
  std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%zu\t%zu\t%.6f\n", arm.c_str(), a.metrics.map,
                a.metrics.recall, a.metrics.evaluated, a.metrics.skipped, final_loss);
  out << buf;
}

// ---- subcommand configs ----

struct GenArgs {
  std::string out_dir;
  SynthConfig synth;
};

struct PartitionArgs {
  std::string interactions;
  std::string out_dir;
  std::uint32_t clusters = 16;
  double eps = 0.05;
  std::uint64_t seed = 0;
  bool unit_weights = false;
};

struct TrainArgs {
  std::string interactions, tokens, partition, out_dir;
  std::string negatives = "graph";
  TrainConfig cfg;
  double eval_frac = 0.1;
};

struct RouterArgs {
  std::string vectors, ids, partition, out;
  RouterTrainConfig cfg;
};

struct BuildArgs {
  std::string vectors, ids, partition, router, out_dir;
  std::string backend = "brute";
  IvfParams ivf;
  unsigned jobs = 2;
};

struct QueryArgs {
  std::string index_dir, queries, out;
  std::size_t k = 100;
  std::uint32_t probes = 4;
  double cutoff = 0.99;
};

struct BenchArgs {
  std::string corpus, queries, ids, partition, router, out_dir;
  std::string backend = "brute";
  IvfParams ivf;
  BenchConfig bench;
  unsigned jobs = 2;
};

struct ScheduleArgs {
  std::string times, out;
  std::vector<std::uint32_t> machines = {1, 2, 4, 8, 16};
};

struct PipelineArgs {
  std::string out_dir;
  SynthConfig synth;
  std::uint32_t clusters = 16;
  double eps = 0.05;
  std::string backend = "brute";
  IvfParams ivf;
  TrainConfig train_cfg;
  RouterTrainConfig router_cfg;
  BenchConfig bench;
  double eval_frac = 0.1;
  unsigned jobs = 2;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenArgs& args) {
  auto data = generate(args.synth);
  fs::create_directories(args.out_dir);
  save_interactions(data.records, (fs::path(args.out_dir) / "interactions.tsv").string());
  save_labels(data, (fs::path(args.out_dir) / "labels.tsv").string());
  save_tokens(data, (fs::path(args.out_dir) / "tokens.tsv").string());
  std::cout << "generated " << data.num_queries() << " queries, " << data.num_docs() << " docs, "
            << data.records.size() << " interactions\n";
  return 0;
}

int cmd_partition(const PartitionArgs& args) {
  auto records = load_interactions(args.interactions);
  auto graph = build_graph(records);
  auto p = partition(graph, args.clusters, args.eps, args.seed, args.unit_weights);
  fs::create_directories(args.out_dir);
  save_partitioning(p, graph, (fs::path(args.out_dir) / "partition.tsv").string());
  save_id_tables(graph, (fs::path(args.out_dir) / "queries.ids").string(),
                 (fs::path(args.out_dir) / "docs.ids").string());
  std::cout << "r=" << args.clusters << " cut=" << edge_cut(graph, p)
            << " balance=" << balance_factor(p) << " doc_balance=" << doc_balance_factor(p)
            << " total_weight=" << graph.total_edge_weight() << "\n";
  return 0;
}

int cmd_train(const TrainArgs& args) {
  auto records = load_interactions(args.interactions);
  auto graph = build_graph(records);
  auto tokens = load_tokens(args.tokens);
  auto split = make_training_split(graph, tokens, args.eval_frac, args.cfg.seed);

  TrainConfig cfg = args.cfg;
  Partitioning p;
  AffinityMatrix a;
  const Partitioning* pp = nullptr;
  const AffinityMatrix* pa = nullptr;
  if (args.negatives == "graph") {
    cfg.negatives = NegativeMode::kGraph;
    if (args.partition.empty()) throw DataError("--negatives graph requires --partition");
    p = load_partitioning(graph, args.partition);
    a = cluster_affinity(graph, p);
    pp = &p;
    pa = &a;
  } else if (args.negatives == "random") {
    cfg.negatives = NegativeMode::kRandom;
  } else {
    throw DataError("unknown negative source '" + args.negatives + "' (expected: random, graph)");
  }

  auto artifacts = run_training(graph, split, cfg, pp, pa);
  fs::create_directories(args.out_dir);
  save_model(artifacts.model, (fs::path(args.out_dir) / "model.emb").string());
  artifacts.model.vocab.save((fs::path(args.out_dir) / "vocab.tsv").string());
  save_vectors(export_embeddings(artifacts.model, split.train.query_tokens),
               (fs::path(args.out_dir) / "query_vecs.vec").string());
  save_vectors(export_embeddings(artifacts.model, split.train.doc_tokens),
               (fs::path(args.out_dir) / "doc_vecs.vec").string());
  std::ofstream metrics(fs::path(args.out_dir) / "metrics.tsv");
  metrics << "arm\tmap\trecall\tevaluated\tskipped\tfinal_loss\n";
  write_metrics(metrics, args.negatives, artifacts);
  std::cout << "arm=" << args.negatives << " matching_map=" << artifacts.metrics.map
            << " matching_recall=" << artifacts.metrics.recall << "\n";
  return 0;
}

int cmd_train_router(const RouterArgs& args) {
  auto vecs = load_vectors(args.vectors);
  auto ids = load_id_table(args.ids);
  auto labels = load_partition_labels(args.partition);
  std::vector<std::uint32_t> y(vecs.count());
  for (std::size_t i = 0; i < vecs.count(); ++i) {
    std::uint64_t dense = vecs.ids[i];
    if (dense >= ids.size()) throw DataError("vector id out of range of the id table");
    auto it = labels.cluster_of.find(ids[dense]);
    if (it == labels.cluster_of.end())
      throw DataError("entity '" + ids[dense] + "' missing from partitioning");
    y[i] = it->second;
  }
  RouterTrainResult result;
  auto model = train_router<float>(std::span<const float>(vecs.data.data(), vecs.data.size()), y,
                                   vecs.dim, labels.num_clusters, args.cfg, &result);
  save_router(model, args.out);
  std::cout << "router train accuracy=" << result.final_accuracy << "\n";
  return 0;
}

int cmd_build_index(const BuildArgs& args) {
  auto vecs = load_vectors(args.vectors);
  auto ids = load_id_table(args.ids);
  auto labels = load_partition_labels(args.partition);
  auto p = doc_partitioning(labels, ids);
  PnnsBuildOptions options;
  options.backend = backend_from_string(args.backend);
  options.ivf = args.ivf;
  options.jobs = args.jobs;
  auto index = build_partitioned(vecs, p, options);
  if (!args.router.empty()) index.set_router(load_router<float>(args.router));
  save_partitioned(index, args.out_dir);
  double total = 0.0;
  for (double s : index.build_seconds()) total += s;
  std::cout << "built " << index.num_clusters() << " cluster indexes over " << index.total_docs()
            << " docs in " << total << "s\n";
  return 0;
}

int cmd_query(const QueryArgs& args) {
  auto index = load_partitioned(args.index_dir);
  if (!index.has_router()) throw DataError("index has no router.rtr; build with --router");
  auto queries = load_vectors(args.queries);
  std::ofstream out(args.out);
  if (!out) throw DataError("cannot open for writing: " + args.out);
  char buf[128];
  for (std::size_t i = 0; i < queries.count(); ++i) {
    auto hits = index.query(queries.row(i), args.k, args.probes, args.cutoff);
    for (std::size_t rank = 0; rank < hits.size(); ++rank) {
      std::snprintf(buf, sizeof(buf), "%llu\t%zu\t%llu\t%.6f\n",
                    static_cast<unsigned long long>(queries.ids[i]), rank + 1,
                    static_cast<unsigned long long>(hits[rank].id), hits[rank].score);
      out << buf;
    }
  }
  return 0;
}

int cmd_bench(const BenchArgs& args) {
  auto corpus = load_vectors(args.corpus);
  auto queries = load_vectors(args.queries);
  if (queries.count() == 0) throw DataError("bench: query file is empty");
  auto ids = load_id_table(args.ids);
  auto labels = load_partition_labels(args.partition);
  auto p = doc_partitioning(labels, ids);
  PnnsBuildOptions options;
  options.backend = backend_from_string(args.backend);
  options.ivf = args.ivf;
  options.jobs = args.jobs;
  auto index = build_partitioned(corpus, p, options);
  index.set_router(load_router<float>(args.router));

  BenchConfig cfg = args.bench;
  auto report = run_bench(index, corpus, queries, cfg);
  fs::create_directories(args.out_dir);
  write_bench_tsv(report, (fs::path(args.out_dir) / "bench.tsv").string());
  write_bench_text(report, (fs::path(args.out_dir) / "bench.txt").string());
  write_schedule_tsv(report.makespans, (fs::path(args.out_dir) / "schedule.tsv").string());
  for (const auto& row : report.rows)
    std::cout << "probes=" << row.probes << " recall@" << row.k << "=" << row.mean_recall
              << " mean_latency=" << row.latency_mean_ms << "ms\n";
  return 0;
}

int cmd_schedule(const ScheduleArgs& args) {
  std::ifstream in(args.times);
  if (!in) throw DataError("cannot open build times: " + args.times);
  std::vector<double> times;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = detail::split(line, '\t');
    times.push_back(std::stod(std::string(cols.size() > 1 ? cols[1] : cols[0])));
  }
  auto table = simulate_build(times, args.machines);
  write_schedule_tsv(table, args.out);
  for (auto [m, s] : table) std::cout << "machines=" << m << " makespan=" << s << "s\n";
  return 0;
}

int cmd_pipeline(const PipelineArgs& args) {
  fs::create_directories(args.out_dir);
  auto stage_path = [&](const std::string& name) { return (fs::path(args.out_dir) / name).string(); };

  // gen
  SynthConfig synth = args.synth;
  synth.seed = args.seed;
  auto data = generate(synth);
  save_interactions(data.records, stage_path("interactions.tsv"));
  save_labels(data, stage_path("labels.tsv"));
  save_tokens(data, stage_path("tokens.tsv"));

  // graph + partition
  auto graph = build_graph(data.records);
  save_id_tables(graph, stage_path("queries.ids"), stage_path("docs.ids"));
  auto p = partition(graph, args.clusters, args.eps, args.seed);
  save_partitioning(p, graph, stage_path("partition.tsv"));
  auto affinity = cluster_affinity(graph, p);

  // train both negative-sampling arms with identical budgets
  std::unordered_map<std::string, std::vector<std::string>> tokens;
  for (std::size_t i = 0; i < data.query_ids.size(); ++i) tokens[data.query_ids[i]] = data.query_tokens[i];
  for (std::size_t i = 0; i < data.doc_ids.size(); ++i) tokens[data.doc_ids[i]] = data.doc_tokens[i];
  auto split = make_training_split(graph, tokens, args.eval_frac, args.seed);

  TrainConfig base = args.train_cfg;
  base.seed = args.seed;
  TrainConfig random_cfg = base;
  random_cfg.negatives = NegativeMode::kRandom;
  TrainConfig graph_cfg = base;
  graph_cfg.negatives = NegativeMode::kGraph;
  auto random_arm = run_training(graph, split, random_cfg, &p, &affinity);
  auto graph_arm = run_training(graph, split, graph_cfg, &p, &affinity);
  save_model(random_arm.model, stage_path("model_random.emb"));
  save_model(graph_arm.model, stage_path("model_graph.emb"));
  graph_arm.model.vocab.save(stage_path("vocab.tsv"));
  {
    std::ofstream metrics(stage_path("metrics.tsv"));
    metrics << "arm\tmap\trecall\tevaluated\tskipped\tfinal_loss\n";
    write_metrics(metrics, "random", random_arm);
    write_metrics(metrics, "graph", graph_arm);
  }

  // embeddings from the graph-negative arm feed the deployable artifact
  auto query_vecs = export_embeddings(graph_arm.model, split.train.query_tokens);
  auto doc_vecs = export_embeddings(graph_arm.model, split.train.doc_tokens);
  save_vectors(query_vecs, stage_path("query_vecs.vec"));
  save_vectors(doc_vecs, stage_path("doc_vecs.vec"));

  // router on query embeddings, supervised by the query's cluster
  std::vector<std::uint32_t> router_labels(graph.num_queries());
  for (std::uint32_t q = 0; q < graph.num_queries(); ++q) router_labels[q] = p.assignment[q];
  RouterTrainConfig router_cfg = args.router_cfg;
  router_cfg.seed = args.seed;
  RouterTrainResult router_result;
  auto router = train_router<float>(
      std::span<const float>(query_vecs.data.data(), query_vecs.data.size()), router_labels,
      query_vecs.dim, args.clusters, router_cfg, &router_result);
  save_router(router, stage_path("router.rtr"));

  // partitioned index + bench
  PnnsBuildOptions options;
  options.backend = backend_from_string(args.backend);
  options.ivf = args.ivf;
  options.ivf.seed = args.seed;
  options.jobs = args.jobs;
  Partitioning doc_p;
  doc_p.num_clusters = p.num_clusters;
  doc_p.eps = p.eps;
  doc_p.seed = p.seed;
  doc_p.num_queries = 0;
  doc_p.assignment.resize(graph.num_docs());
  for (std::uint32_t d = 0; d < graph.num_docs(); ++d) doc_p.assignment[d] = p.cluster_of_doc(d);
  auto index = build_partitioned(doc_vecs, doc_p, options);
  index.set_router(router);
  save_partitioned(index, stage_path("index"));

  BenchConfig bench = args.bench;
  std::vector<std::uint32_t> probes;
  for (std::uint32_t d : bench.probes)
    if (d <= args.clusters) probes.push_back(d);
  if (probes.empty()) probes.push_back(args.clusters);
  bench.probes = probes;
  auto report = run_bench(index, doc_vecs, query_vecs, bench);
  write_bench_tsv(report, stage_path("bench.tsv"));
  write_bench_text(report, stage_path("bench.txt"));
  write_schedule_tsv(report.makespans, stage_path("schedule.tsv"));

  // manifest: configuration + artifact list, no wall-time fields
  {
    std::ofstream manifest(stage_path("manifest.tsv"));
    manifest << "version\t" << kVersion << '\n';
    manifest << "seed\t" << args.seed << '\n';
    manifest << "topics\t" << synth.topics << '\n';
    manifest << "queries_per_topic\t" << synth.queries_per_topic << '\n';
    manifest << "docs_per_topic\t" << synth.docs_per_topic << '\n';
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g\t%.6g", synth.p_in, synth.p_out);
    manifest << "p_in_p_out\t" << buf << '\n';
    manifest << "clusters\t" << args.clusters << '\n';
    std::snprintf(buf, sizeof(buf), "%.6g", args.eps);
    manifest << "eps\t" << buf << '\n';
    manifest << "backend\t" << args.backend << '\n';
    manifest << "dim\t" << base.dim << '\n';
    manifest << "epochs\t" << base.epochs << '\n';
    manifest << "batch_size\t" << base.batch_size << '\n';
    manifest << "neg_budget\t" << base.neg_budget << '\n';
    manifest << "window\t" << base.window << '\n';
    manifest << "router_hidden\t" << router_cfg.hidden << '\n';
    manifest << "router_epochs\t" << router_cfg.epochs << '\n';
    std::snprintf(buf, sizeof(buf), "%.6f", router_result.final_accuracy);
    manifest << "router_train_accuracy\t" << buf << '\n';
    manifest << "artifacts\tinteractions.tsv labels.tsv tokens.tsv queries.ids docs.ids "
                "partition.tsv model_random.emb model_graph.emb vocab.tsv metrics.tsv "
                "query_vecs.vec doc_vecs.vec router.rtr index bench.tsv bench.txt schedule.tsv\n";
  }
  std::cout << "pipeline complete: " << args.out_dir << "\n";
  std::cout << "  random arm recall=" << random_arm.metrics.recall
            << " graph arm recall=" << graph_arm.metrics.recall << "\n";
  std::cout << "  router accuracy=" << router_result.final_accuracy << "\n";
  for (const auto& row : report.rows)
    std::cout << "  probes=" << row.probes << " recall@" << row.k << "=" << row.mean_recall << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partitioned nearest neighbor search over dyadic interaction data"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a planted-structure synthetic dataset");
  gen->add_option("--out-dir", gen_args.out_dir)->required();
  gen->add_option("--topics", gen_args.synth.topics);
  gen->add_option("--queries-per-topic", gen_args.synth.queries_per_topic);
  gen->add_option("--docs-per-topic", gen_args.synth.docs_per_topic);
  gen->add_option("--p-in", gen_args.synth.p_in);
  gen->add_option("--p-out", gen_args.synth.p_out);
  gen->add_option("--noise-prob", gen_args.synth.noise_prob);
  gen->add_option("--seed", gen_args.synth.seed);

  PartitionArgs part_args;
  auto* part = app.add_subcommand("partition", "balanced k-way partition of the interaction graph");
  part->add_option("--interactions", part_args.interactions)->required();
  part->add_option("--out-dir", part_args.out_dir)->required();
  part->add_option("--clusters", part_args.clusters);
  part->add_option("--eps", part_args.eps);
  part->add_option("--seed", part_args.seed);
  part->add_flag("--unit-weights", part_args.unit_weights,
                 "ignore edge weights in the cut objective");

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "train the two-tower embedding model");
  tr->add_option("--interactions", train_args.interactions)->required();
  tr->add_option("--tokens", train_args.tokens)->required();
  tr->add_option("--out-dir", train_args.out_dir)->required();
  tr->add_option("--negatives", train_args.negatives, "random|graph");
  tr->add_option("--partition", train_args.partition);
  tr->add_option("--window", train_args.cfg.window);
  tr->add_option("--neg-budget", train_args.cfg.neg_budget);
  tr->add_option("--mix", train_args.cfg.random_mix,
                 "fraction of extra uniform negatives mixed into each batch");
  tr->add_option("--dim", train_args.cfg.dim);
  tr->add_option("--batch-size", train_args.cfg.batch_size);
  tr->add_option("--epochs", train_args.cfg.epochs);
  tr->add_option("--seed", train_args.cfg.seed);
  tr->add_option("--t1", train_args.cfg.t1);
  tr->add_option("--t2", train_args.cfg.t2);
  tr->add_option("--eval-frac", train_args.eval_frac);

  RouterArgs router_args;
  auto* rt = app.add_subcommand("train-router", "train the cluster prediction model");
  rt->add_option("--vectors", router_args.vectors)->required();
  rt->add_option("--ids", router_args.ids)->required();
  rt->add_option("--partition", router_args.partition)->required();
  rt->add_option("--out", router_args.out)->required();
  rt->add_option("--hidden", router_args.cfg.hidden);
  rt->add_option("--epochs", router_args.cfg.epochs);
  rt->add_option("--batch-size", router_args.cfg.batch_size);
  rt->add_option("--seed", router_args.cfg.seed);

  BuildArgs build_args;
  auto* bi = app.add_subcommand("build-index", "build the partitioned search index");
  bi->add_option("--vectors", build_args.vectors)->required();
  bi->add_option("--ids", build_args.ids)->required();
  bi->add_option("--partition", build_args.partition)->required();
  bi->add_option("--router", build_args.router);
  bi->add_option("--out-dir", build_args.out_dir)->required();
  bi->add_option("--backend", build_args.backend, "brute|ivf");
  bi->add_option("--nlist", build_args.ivf.nlist);
  bi->add_option("--nprobe", build_args.ivf.nprobe);
  bi->add_option("--kmeans-iters", build_args.ivf.kmeans_iters);
  bi->add_option("--seed", build_args.ivf.seed);
  bi->add_option("--jobs", build_args.jobs);

  QueryArgs query_args;
  auto* qr = app.add_subcommand("query", "run partitioned top-k queries");
  qr->add_option("--index", query_args.index_dir)->required();
  qr->add_option("--queries", query_args.queries)->required();
  qr->add_option("--out", query_args.out)->required();
  qr->add_option("--k", query_args.k);
  qr->add_option("--probes", query_args.probes);
  qr->add_option("--cutoff", query_args.cutoff);

  BenchArgs bench_args;
  auto* be = app.add_subcommand("bench", "recall/latency/build-time benchmark against brute force");
  be->add_option("--corpus", bench_args.corpus)->required();
  be->add_option("--queries", bench_args.queries)->required();
  be->add_option("--ids", bench_args.ids)->required();
  be->add_option("--partition", bench_args.partition)->required();
  be->add_option("--router", bench_args.router)->required();
  be->add_option("--out-dir", bench_args.out_dir)->required();
  be->add_option("--backend", bench_args.backend, "brute|ivf");
  be->add_option("--nlist", bench_args.ivf.nlist);
  be->add_option("--nprobe", bench_args.ivf.nprobe);
  be->add_option("--kmeans-iters", bench_args.ivf.kmeans_iters);
  be->add_option("--seed", bench_args.ivf.seed);
  be->add_option("--probes", bench_args.bench.probes)->delimiter(',');
  be->add_option("--k", bench_args.bench.k);
  be->add_option("--cutoff", bench_args.bench.cutoff);
  be->add_option("--machines", bench_args.bench.machines)->delimiter(',');
  be->add_option("--jobs", bench_args.jobs);

  ScheduleArgs sched_args;
  auto* sc = app.add_subcommand("schedule", "simulate multi-machine index builds (LPT)");
  sc->add_option("--times", sched_args.times)->required();
  sc->add_option("--out", sched_args.out)->required();
  sc->add_option("--machines", sched_args.machines)->delimiter(',');

  PipelineArgs pipe_args;
  auto* pl = app.add_subcommand("pipeline", "run gen -> partition -> train -> route -> index -> bench");
  pl->add_option("--out-dir", pipe_args.out_dir)->required();
  pl->add_option("--clusters", pipe_args.clusters);
  pl->add_option("--eps", pipe_args.eps);
  pl->add_option("--backend", pipe_args.backend, "brute|ivf");
  pl->add_option("--seed", pipe_args.seed);
  pl->add_option("--topics", pipe_args.synth.topics);
  pl->add_option("--queries-per-topic", pipe_args.synth.queries_per_topic);
  pl->add_option("--docs-per-topic", pipe_args.synth.docs_per_topic);
  pl->add_option("--p-in", pipe_args.synth.p_in);
  pl->add_option("--p-out", pipe_args.synth.p_out);
  pl->add_option("--dim", pipe_args.train_cfg.dim);
  pl->add_option("--epochs", pipe_args.train_cfg.epochs);
  pl->add_option("--batch-size", pipe_args.train_cfg.batch_size);
  pl->add_option("--window", pipe_args.train_cfg.window);
  pl->add_option("--neg-budget", pipe_args.train_cfg.neg_budget);
  pl->add_option("--router-hidden", pipe_args.router_cfg.hidden);
  pl->add_option("--router-epochs", pipe_args.router_cfg.epochs);
  pl->add_option("--probes", pipe_args.bench.probes)->delimiter(',');
  pl->add_option("--k", pipe_args.bench.k);
  pl->add_option("--cutoff", pipe_args.bench.cutoff);
  pl->add_option("--nlist", pipe_args.ivf.nlist);
  pl->add_option("--nprobe", pipe_args.ivf.nprobe);
  pl->add_option("--eval-frac", pipe_args.eval_frac);
  pl->add_option("--jobs", pipe_args.jobs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // 1: usage error
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (part->parsed()) return cmd_partition(part_args);
    if (tr->parsed()) return cmd_train(train_args);
    if (rt->parsed()) return cmd_train_router(router_args);
    if (bi->parsed()) return cmd_build_index(build_args);
    if (qr->parsed()) return cmd_query(query_args);
    if (be->parsed()) return cmd_bench(bench_args);
    if (sc->parsed()) return cmd_schedule(sched_args);
    if (pl->parsed()) return cmd_pipeline(pipe_args);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "pnns/common.hpp"
#include "pnns/graph.hpp"
#include "pnns/partitioning.hpp"

// Balanced k-way partitioner: multilevel heavy-edge-matching coarsening,
// greedy balanced region growing for the initial partition, and boundary
// refinement passes that only accept balance-preserving, cut-reducing moves.

namespace pnns {
namespace detail {

struct WorkGraph {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint32_t> adj;
  std::vector<std::uint64_t> ewgt;
  std::vector<std::uint64_t> vwgt;
  std::uint64_t total_vweight = 0;

  std::uint32_t n() const { return static_cast<std::uint32_t>(vwgt.size()); }
  std::uint32_t degree(std::uint32_t v) const {
    return static_cast<std::uint32_t>(offsets[v + 1] - offsets[v]);
  }
};

inline WorkGraph work_graph_from(const BipartiteGraph& g, bool unit_weights) {
  WorkGraph w;
  const std::uint32_t n = g.num_vertices();
  w.vwgt.assign(n, 1);
  w.total_vweight = n;
  w.offsets.assign(n + 1, 0);
  for (std::uint32_t v = 0; v < n; ++v) w.offsets[v + 1] = w.offsets[v] + g.degree(v);
  w.adj.resize(w.offsets[n]);
  w.ewgt.resize(w.offsets[n]);
  for (std::uint32_t v = 0; v < n; ++v) {
    auto nbrs = g.neighbors(v);
    auto ws = g.edge_weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      w.adj[w.offsets[v] + i] = nbrs[i];
      w.ewgt[w.offsets[v] + i] = unit_weights ? 1 : ws[i];
    }
  }
  return w;
}

inline std::uint64_t work_cut(const WorkGraph& g, const std::vector<std::uint32_t>& assign) {
  std::uint64_t cut = 0;
  for (std::uint32_t v = 0; v < g.n(); ++v)
    for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i)
      if (assign[v] != assign[g.adj[i]]) cut += g.ewgt[i];
  return cut / 2;
}

// Heavy-edge matching in randomized visit order; ties by lowest vertex index.
// Pairs whose combined weight would exceed max_vwgt stay unmatched.
inline std::vector<std::uint32_t> heavy_edge_matching(const WorkGraph& g, std::uint64_t max_vwgt,
                                                      std::mt19937_64& rng) {
  const std::uint32_t n = g.n();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint32_t> match(n, UINT32_MAX);
  for (std::uint32_t v : order) {
    if (match[v] != UINT32_MAX) continue;
    std::uint32_t best = v;
    std::uint64_t best_w = 0;
    for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
      std::uint32_t u = g.adj[i];
      if (u == v || match[u] != UINT32_MAX) continue;
      if (g.vwgt[v] + g.vwgt[u] > max_vwgt) continue;
      std::uint64_t w = g.ewgt[i];
      if (w > best_w || (w == best_w && best != v && u < best)) {
        best = u;
        best_w = w;
      }
    }
    match[v] = best;
    match[best] = v;
  }
  return match;
}

// Contracts matched pairs. fine_to_coarse maps every fine vertex to its coarse id.
inline WorkGraph contract(const WorkGraph& g, const std::vector<std::uint32_t>& match,
                          std::vector<std::uint32_t>& fine_to_coarse) {
  const std::uint32_t n = g.n();
  fine_to_coarse.assign(n, UINT32_MAX);
  std::uint32_t nc = 0;
  for (std::uint32_t v = 0; v < n; ++v)
    if (v <= match[v]) fine_to_coarse[v] = nc++;
  for (std::uint32_t v = 0; v < n; ++v)
    if (match[v] < v) fine_to_coarse[v] = fine_to_coarse[match[v]];

  WorkGraph c;
  c.vwgt.assign(nc, 0);
  for (std::uint32_t v = 0; v < n; ++v) c.vwgt[fine_to_coarse[v]] += g.vwgt[v];
  c.total_vweight = g.total_vweight;

  c.offsets.assign(nc + 1, 0);
  std::vector<std::pair<std::uint32_t, std::uint64_t>> row;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> rows(nc);
  for (std::uint32_t v = 0; v < n; ++v) {
    std::uint32_t cv = fine_to_coarse[v];
    for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
      std::uint32_t cu = fine_to_coarse[g.adj[i]];
      if (cu != cv) rows[cv].emplace_back(cu, g.ewgt[i]);
    }
  }
  for (std::uint32_t cv = 0; cv < nc; ++cv) {
    auto& r = rows[cv];
    std::sort(r.begin(), r.end());
    std::size_t out = 0;
    for (std::size_t i = 0; i < r.size();) {
      std::uint64_t w = 0;
      std::size_t j = i;
      while (j < r.size() && r[j].first == r[i].first) w += r[j++].second;
      r[out++] = {r[i].first, w};
      i = j;
    }
    r.resize(out);
    c.offsets[cv + 1] = c.offsets[cv] + out;
  }
  c.adj.resize(c.offsets[nc]);
  c.ewgt.resize(c.offsets[nc]);
  for (std::uint32_t cv = 0; cv < nc; ++cv)
    for (std::size_t i = 0; i < rows[cv].size(); ++i) {
      c.adj[c.offsets[cv] + i] = rows[cv][i].first;
      c.ewgt[c.offsets[cv] + i] = rows[cv][i].second;
    }
  return c;
}

inline std::vector<std::vector<std::uint32_t>> connected_components(const WorkGraph& g) {
  std::vector<std::vector<std::uint32_t>> comps;
  std::vector<bool> seen(g.n(), false);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < g.n(); ++s) {
    if (seen[s]) continue;
    comps.emplace_back();
    stack.push_back(s);
    seen[s] = true;
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      stack.pop_back();
      comps.back().push_back(v);
      for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i)
        if (!seen[g.adj[i]]) {
          seen[g.adj[i]] = true;
          stack.push_back(g.adj[i]);
        }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

// One sweep over boundary vertices; accepts only strictly cut-reducing moves
// that keep the target cluster within cap. Returns true if any move was made.
inline bool refine_pass(const WorkGraph& g, std::vector<std::uint32_t>& assign,
                        std::vector<std::uint64_t>& loads, std::uint64_t cap,
                        std::vector<std::uint64_t>& conn_scratch,
                        std::vector<std::uint32_t>& touched) {
  bool moved = false;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    const std::uint32_t own = assign[v];
    touched.clear();
    bool boundary = false;
    for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
      std::uint32_t c = assign[g.adj[i]];
      if (conn_scratch[c] == 0) touched.push_back(c);
      conn_scratch[c] += g.ewgt[i];
      if (c != own) boundary = true;
    }
    if (boundary) {
      std::sort(touched.begin(), touched.end());
      const std::uint64_t own_conn = conn_scratch[own];
      std::uint32_t best = own;
      std::int64_t best_gain = 0;
      for (std::uint32_t c : touched) {
        if (c == own) continue;
        if (loads[c] + g.vwgt[v] > cap) continue;
        std::int64_t gain = std::int64_t(conn_scratch[c]) - std::int64_t(own_conn);
        if (gain > best_gain) {
          best = c;
          best_gain = gain;
        }
      }
      if (best != own) {
        loads[own] -= g.vwgt[v];
        loads[best] += g.vwgt[v];
        assign[v] = best;
        moved = true;
      }
    }
    for (std::uint32_t c : touched) conn_scratch[c] = 0;
  }
  return moved;
}

inline void refine(const WorkGraph& g, std::vector<std::uint32_t>& assign,
                   std::vector<std::uint64_t>& loads, std::uint64_t cap, std::uint32_t r,
                   int max_passes) {
  std::vector<std::uint64_t> conn(r, 0);
  std::vector<std::uint32_t> touched;
  for (int pass = 0; pass < max_passes; ++pass)
    if (!refine_pass(g, assign, loads, cap, conn, touched)) break;
}

// Greedy balanced region growing. Seeds are spread across connected
// components proportionally to component weight, so cleanly separable graphs
// get one seed per block.
inline std::vector<std::uint32_t> grow_regions(const WorkGraph& g, std::uint32_t r,
                                               std::uint64_t cap, std::mt19937_64& rng) {
  const std::uint32_t n = g.n();
  std::vector<std::uint32_t> assign(n, UINT32_MAX);
  auto comps = connected_components(g);

  std::vector<std::uint64_t> comp_weight(comps.size(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::uint32_t v : comps[c]) comp_weight[c] += g.vwgt[v];

  // Seed quota per component: one each while supply lasts (heaviest first),
  // remainder spread proportionally by weight.
  std::vector<std::uint32_t> quota(comps.size(), 0);
  std::vector<std::size_t> by_weight(comps.size());
  std::iota(by_weight.begin(), by_weight.end(), std::size_t{0});
  std::stable_sort(by_weight.begin(), by_weight.end(),
                   [&](std::size_t a, std::size_t b) { return comp_weight[a] > comp_weight[b]; });
  std::uint32_t remaining = r;
  for (std::size_t i = 0; i < by_weight.size() && remaining > 0; ++i) {
    quota[by_weight[i]] = 1;
    --remaining;
  }
  while (remaining > 0) {
    // Largest weight-per-seed gets the next one.
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (quota[c] >= comps[c].size()) continue;
      double per = double(comp_weight[c]) / double(quota[c] + 1);
      if (per > best) {
        best = per;
        pick = c;
      }
    }
    ++quota[pick];
    --remaining;
  }

  std::vector<std::uint64_t> loads(r, 0);
  std::vector<std::uint64_t> conn(std::size_t(n) * r, 0);
  std::uint32_t next_cluster = 0;
  std::uint32_t assigned = 0;
  auto place = [&](std::uint32_t v, std::uint32_t c) {
    assign[v] = c;
    loads[c] += g.vwgt[v];
    ++assigned;
    for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i)
      if (assign[g.adj[i]] == UINT32_MAX) conn[std::size_t(g.adj[i]) * r + c] += g.ewgt[i];
  };
  for (std::size_t c = 0; c < comps.size(); ++c) {
    std::vector<std::uint32_t> pool = comps[c];
    for (std::uint32_t s = 0; s < quota[c] && !pool.empty(); ++s) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      std::size_t idx = pick(rng);
      place(pool[idx], next_cluster++);
      pool.erase(pool.begin() + std::ptrdiff_t(idx));
    }
  }

  std::vector<bool> full(r, false);
  while (assigned < n) {
    // Lightest non-full cluster grows next; ties to the lowest cluster id.
    std::uint32_t c = UINT32_MAX;
    for (std::uint32_t i = 0; i < r; ++i)
      if (!full[i] && (c == UINT32_MAX || loads[i] < loads[c])) c = i;
    if (c == UINT32_MAX) {
      // Every cluster is at cap; place remaining vertices on the lightest
      // cluster and let the final rebalance pass clean up.
      std::uint32_t lightest = 0;
      for (std::uint32_t i = 1; i < r; ++i)
        if (loads[i] < loads[lightest]) lightest = i;
      for (std::uint32_t v = 0; v < n && assigned < n; ++v)
        if (assign[v] == UINT32_MAX) place(v, lightest);
      break;
    }
    // Strongest-connected unassigned vertex that fits; fall back to the
    // lowest-index unassigned vertex when the frontier is empty.
    std::uint32_t best = UINT32_MAX;
    std::uint64_t best_conn = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (assign[v] != UINT32_MAX || loads[c] + g.vwgt[v] > cap) continue;
      std::uint64_t w = conn[std::size_t(v) * r + c];
      if (best == UINT32_MAX || w > best_conn) {
        best = v;
        best_conn = w;
      }
    }
    if (best == UINT32_MAX) {
      full[c] = true;
      continue;
    }
    place(best, c);
  }
  return assign;
}

// Moves vertices out of over-cap clusters into the lightest cluster, choosing
// the move with least cut damage each time. With unit vertex weights this
// always terminates with every cluster within cap.
inline void rebalance(const WorkGraph& g, std::vector<std::uint32_t>& assign,
                      std::vector<std::uint64_t>& loads, std::uint64_t cap, std::uint32_t r) {
  while (true) {
    std::uint32_t worst = 0;
    for (std::uint32_t c = 1; c < r; ++c)
      if (loads[c] > loads[worst]) worst = c;
    if (loads[worst] <= cap) return;
    std::uint32_t lightest = 0;
    for (std::uint32_t c = 1; c < r; ++c)
      if (loads[c] < loads[lightest]) lightest = c;
    std::uint32_t best_v = UINT32_MAX;
    std::int64_t best_gain = INT64_MIN;
    for (std::uint32_t v = 0; v < g.n(); ++v) {
      if (assign[v] != worst) continue;
      if (loads[lightest] + g.vwgt[v] > cap) continue;
      std::int64_t to_target = 0, to_own = 0;
      for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
        if (assign[g.adj[i]] == lightest) to_target += std::int64_t(g.ewgt[i]);
        else if (assign[g.adj[i]] == worst) to_own += std::int64_t(g.ewgt[i]);
      }
      std::int64_t gain = to_target - to_own;
      if (gain > best_gain) {
        best_gain = gain;
        best_v = v;
      }
    }
    if (best_v == UINT32_MAX) return;  // nothing movable; give up rather than loop
    loads[worst] -= g.vwgt[best_v];
    loads[lightest] += g.vwgt[best_v];
    assign[best_v] = lightest;
  }
}

}  // namespace detail

/// Partitions the graph into r balanced clusters, approximately minimizing
/// weighted edge cut. Deterministic for a fixed (graph, r, eps, seed).
/// With unit_weights all edges count 1 toward the objective; the reported
/// cut from edge_cut() always uses the true weights.
inline Partitioning partition(const BipartiteGraph& g, std::uint32_t r, double eps,
                              std::uint64_t seed, bool unit_weights = false) {
  const std::uint32_t n = g.num_vertices();
  if (r < 1) throw DataError("partition: r must be >= 1");
  if (r > n) throw DataError("partition: r exceeds vertex count");
  if (eps < 0.0) throw DataError("partition: eps must be >= 0");

  Partitioning p;
  p.num_clusters = r;
  p.eps = eps;
  p.num_queries = g.num_queries();
  p.seed = seed;
  if (r == 1) {
    p.assignment.assign(n, 0);
    return p;
  }

  const std::uint64_t ideal = ideal_cluster_size(n, r);
  const std::uint64_t cap = static_cast<std::uint64_t>((1.0 + eps) * double(ideal) + 1e-9);
  std::mt19937_64 rng(seed);

  // Coarsen until the graph is small enough for exhaustive-ish seeding.
  const std::uint32_t coarsen_target = std::max<std::uint32_t>(30 * r, 200);
  std::vector<detail::WorkGraph> levels;
  std::vector<std::vector<std::uint32_t>> maps;  // fine vertex -> coarse vertex
  levels.push_back(detail::work_graph_from(g, unit_weights));
  while (levels.back().n() > coarsen_target) {
    auto match = detail::heavy_edge_matching(levels.back(), ideal, rng);
    std::vector<std::uint32_t> f2c;
    auto coarse = detail::contract(levels.back(), match, f2c);
    if (coarse.n() >= levels.back().n() * 49 / 50) break;  // matching stalled
    maps.push_back(std::move(f2c));
    levels.push_back(std::move(coarse));
  }

  // Initial partition on the coarsest level: several seeded growing attempts,
  // each polished by refinement; keep the lowest-cut result.
  const detail::WorkGraph& coarsest = levels.back();
  constexpr int kAttempts = 8;
  std::vector<std::uint32_t> best_assign;
  std::uint64_t best_cut = UINT64_MAX;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto assign = detail::grow_regions(coarsest, r, cap, rng);
    std::vector<std::uint64_t> loads(r, 0);
    for (std::uint32_t v = 0; v < coarsest.n(); ++v) loads[assign[v]] += coarsest.vwgt[v];
    detail::refine(coarsest, assign, loads, cap, r, 10);
    std::uint64_t cut = detail::work_cut(coarsest, assign);
    if (cut < best_cut) {
      best_cut = cut;
      best_assign = std::move(assign);
    }
  }

  // Uncoarsen with refinement at every level.
  std::vector<std::uint32_t> assign = std::move(best_assign);
  for (std::size_t level = levels.size(); level-- > 1;) {
    const auto& fine = levels[level - 1];
    const auto& f2c = maps[level - 1];
    std::vector<std::uint32_t> fine_assign(fine.n());
    for (std::uint32_t v = 0; v < fine.n(); ++v) fine_assign[v] = assign[f2c[v]];
    std::vector<std::uint64_t> loads(r, 0);
    for (std::uint32_t v = 0; v < fine.n(); ++v) loads[fine_assign[v]] += fine.vwgt[v];
    detail::refine(fine, fine_assign, loads, cap, r, 8);
    assign = std::move(fine_assign);
  }

  // The finest level has unit vertex weights, so balance is always repairable.
  {
    std::vector<std::uint64_t> loads(r, 0);
    for (std::uint32_t v = 0; v < n; ++v) loads[assign[v]] += 1;
    detail::rebalance(levels.front(), assign, loads, cap, r);
    detail::refine(levels.front(), assign, loads, cap, r, 8);
  }

  p.assignment = std::move(assign);
  if (balance_factor(p) > 1.0 + eps + 1e-12)
    throw InvariantError("partition: balance constraint violated");
  return p;
}

}  // namespace pnns

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pnns/common.hpp"

// Longest-processing-time greedy assignment of index-build jobs to machines;
// makespan is within 4/3 of optimal (Graham's bound).

namespace pnns {

struct BuildSchedule {
  std::uint32_t machines = 1;
  std::vector<std::uint32_t> assignment;  // job -> machine
  std::vector<double> loads;              // per-machine total seconds
  double makespan = 0.0;
};

/// Sorts jobs by decreasing cost and repeatedly gives the heaviest remaining
/// job to the machine with the lightest load; ties go to the lower machine
/// index. Deterministic.
inline BuildSchedule schedule_lpt(std::span<const double> job_costs, std::uint32_t machines) {
  if (machines < 1) throw DataError("schedule_lpt: need at least one machine");
  if (job_costs.empty()) throw DataError("schedule_lpt: empty job list");
  for (double c : job_costs)
    if (!(c > 0.0)) throw DataError("schedule_lpt: job costs must be positive");

  std::vector<std::uint32_t> order(job_costs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return job_costs[a] > job_costs[b]; });

  BuildSchedule s;
  s.machines = machines;
  s.assignment.assign(job_costs.size(), 0);
  s.loads.assign(machines, 0.0);
  for (std::uint32_t job : order) {
    std::uint32_t lightest = 0;
    for (std::uint32_t m = 1; m < machines; ++m)
      if (s.loads[m] < s.loads[lightest]) lightest = m;
    s.assignment[job] = lightest;
    s.loads[lightest] += job_costs[job];
  }
  s.makespan = *std::max_element(s.loads.begin(), s.loads.end());
  return s;
}

/// Simulated multi-machine build: the makespan of the LPT assignment for each
/// machine count (the load of the busiest machine determines the build time).
inline std::vector<std::pair<std::uint32_t, double>> simulate_build(
    std::span<const double> per_cluster_build_seconds, std::span<const std::uint32_t> machine_counts) {
  std::vector<double> costs;
  costs.reserve(per_cluster_build_seconds.size());
  for (double t : per_cluster_build_seconds)
    if (t > 0.0) costs.push_back(t);
  std::vector<std::pair<std::uint32_t, double>> table;
  table.reserve(machine_counts.size());
  for (std::uint32_t m : machine_counts) {
    double makespan = costs.empty() ? 0.0 : schedule_lpt(costs, m).makespan;
    table.emplace_back(m, makespan);
  }
  return table;
}

}  // namespace pnns

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "fogtap/latency_model.hpp"
#include "fogtap/rng.hpp"
#include "fogtap/scenario.hpp"

namespace fogtap::testing {

// One-sample Kolmogorov-Smirnov statistic of `draws` against `dist`.
inline double ks_statistic(std::vector<double> draws, const LatencyDistribution& dist) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(dist, draws[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Critical value at alpha = 0.01 for large n.
inline double ks_critical_001(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

inline LatencyDistribution reference_gev() { return LatencyDistribution::gev({0.34, 0.04, 0.48}); }

inline LatencyDistribution random_law(RngStream& rng) {
  const auto pick = rng.next_u64() % 4;
  const double base = rng.uniform(0.05, 1.0);
  switch (pick) {
    case 0: return LatencyDistribution::uniform(base, base + rng.uniform(0.05, 1.0));
    case 1: {
      const double shape = rng.uniform(0.05, 0.6);
      const double scale = rng.uniform(0.02, 0.3);
      // Keep the support nonnegative.
      return LatencyDistribution::gev({shape, scale, base + scale / shape});
    }
    case 2: {
      std::vector<double> s;
      for (int i = 0; i < 5; ++i) s.push_back(base + rng.uniform(0.0, 1.0));
      return LatencyDistribution::empirical(std::move(s));
    }
    default: return LatencyDistribution::degenerate(base);
  }
}

inline TimeUtility random_utility(RngStream& rng) {
  const auto pick = rng.next_u64() % 3;
  if (pick == 0) return TimeUtility::step(rng.uniform(0.1, 1.5));
  if (pick == 1) return TimeUtility::exp_decay(rng.uniform(0.2, 4.0));
  const double te = rng.uniform(0.0, 1.0);
  return TimeUtility::wait_ready_first(te, te + rng.uniform(0.05, 1.5));
}

// Small random instance: up to `max_tasks` tasks, 1-2 capacitated nodes with
// capacities 1-3, 0-2 uncapacitated nodes, 1-2 options per node.
inline Scenario random_instance(RngStream& rng, std::size_t max_tasks = 8) {
  Scenario s;
  s.name = "random";
  const std::size_t n_tasks = 1 + rng.next_u64() % max_tasks;
  const std::size_t n_cap = 1 + rng.next_u64() % 2;
  const std::size_t n_inf = rng.next_u64() % 3;
  for (std::size_t z = 0; z < n_cap + n_inf; ++z) {
    NodeSpec n;
    n.id = fmt::format("n{}", z);
    if (z < n_cap) n.capacity = static_cast<int>(1 + rng.next_u64() % 3);
    const std::size_t n_opt = 1 + rng.next_u64() % 2;
    for (std::size_t x = 0; x < n_opt; ++x) n.options.push_back(fmt::format("o{}", x));
    s.nodes.push_back(std::move(n));
  }
  for (std::size_t j = 0; j < n_tasks; ++j) {
    TaskSpec t;
    t.id = fmt::format("t{}", j);
    t.time_utility = random_utility(rng);
    if (rng.uniform() < 0.3) {
      t.quality_floor = rng.uniform(0.0, 0.6);
      t.risk_budget = rng.uniform(0.2, 1.0);
    }
    for (const auto& n : s.nodes) {
      for (const auto& o : n.options) {
        if (rng.uniform() < 0.2) continue;
        // Coarse intrinsic values make exact ties common.
        t.intrinsic[{n.id, o}] = static_cast<double>(rng.next_u64() % 11) / 10.0;
        s.latency.emplace(LatencyKey{t.id, n.id, o}, random_law(rng));
      }
    }
    s.tasks.push_back(std::move(t));
  }
  s.validate();
  return s;
}

}  // namespace fogtap::testing

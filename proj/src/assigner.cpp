#include "fogtap/assigner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {
namespace {

Placement make_placement(const UtilityMatrix& m, std::size_t task, std::size_t node,
                         std::size_t option) {
  const auto& cell = m.at(task, node, option);
  return Placement{node, option, cell->expected_utility, cell->risk};
}

double sum_utility(const std::vector<std::optional<Placement>>& decisions) {
  double total = 0.0;
  for (const auto& d : decisions) {
    if (d) total += d->utility;
  }
  return total;
}

std::vector<bool> capacity_filter(const std::vector<NodeSpec>& nodes, bool capacitated) {
  std::vector<bool> out(nodes.size());
  for (std::size_t z = 0; z < nodes.size(); ++z) out[z] = nodes[z].is_capacitated() == capacitated;
  return out;
}

void check_shape(const std::vector<NodeSpec>& nodes, const UtilityMatrix& m) {
  if (nodes.size() != m.node_count()) {
    throw SolverError(fmt::format("utility matrix has {} nodes, scenario has {}", m.node_count(),
                                  nodes.size()));
  }
}

}  // namespace

UtilityMatrix::UtilityMatrix(std::size_t tasks, const std::vector<std::size_t>& options_per_node)
    : options_per_node_(options_per_node) {
  cells_.resize(tasks);
  for (auto& row : cells_) {
    row.resize(options_per_node_.size());
    for (std::size_t z = 0; z < row.size(); ++z) row[z].resize(options_per_node_[z]);
  }
}

UtilityMatrix UtilityMatrix::evaluate(const Scenario& scenario) {
  std::vector<std::size_t> opts;
  for (const auto& n : scenario.nodes) opts.push_back(n.options.size());
  UtilityMatrix m(scenario.tasks.size(), opts);
  for (std::size_t j = 0; j < scenario.tasks.size(); ++j) {
    const auto& task = scenario.tasks[j];
    for (std::size_t z = 0; z < scenario.nodes.size(); ++z) {
      const auto& node = scenario.nodes[z];
      for (std::size_t x = 0; x < node.options.size(); ++x) {
        const auto a = task.intrinsic.find(PlacementKey{node.id, node.options[x]});
        const auto* dist = scenario.find_latency(j, z, x);
        if (a == task.intrinsic.end() || dist == nullptr) continue;
        m.set(j, z, x, expected_utility(task, a->second, *dist));
      }
    }
  }
  return m;
}

std::size_t AssignmentPlan::placed_on(std::size_t node) const {
  return static_cast<std::size_t>(std::count_if(
      decisions.begin(), decisions.end(), [node](const auto& d) { return d && d->node == node; }));
}

LocalBest lqm(std::span<const std::optional<UtilityReport>> options) {
  LocalBest best;
  for (std::size_t x = 0; x < options.size(); ++x) {
    const auto& cell = options[x];
    if (!cell) continue;
    const double u = cell->feasible ? cell->expected_utility : 0.0;
    if (u > best.utility) {
      best.option = x;
      best.utility = u;
    }
  }
  return best;
}

LocalBest lqm(const UtilityMatrix& m, std::size_t task, std::size_t node) {
  return lqm(m.options(task, node));
}

BestPlacement itp(const UtilityMatrix& m, std::size_t task, const std::vector<bool>& node_filter) {
  BestPlacement best;
  for (std::size_t z = 0; z < m.node_count(); ++z) {
    if (!node_filter.empty() && !node_filter[z]) continue;
    const LocalBest local = lqm(m, task, z);
    if (local.utility > best.utility) {
      best.node = z;
      best.option = local.option;
      best.utility = local.utility;
    }
  }
  return best;
}

AssignmentPlan solve_uncapacitated(const std::vector<NodeSpec>& nodes, const UtilityMatrix& m) {
  check_shape(nodes, m);
  for (const auto& n : nodes) {
    if (n.is_capacitated()) {
      throw SolverError(fmt::format(
          "node '{}' has finite capacity {}; use the capacitated solver", n.id, *n.capacity));
    }
  }
  AssignmentPlan plan;
  plan.solver = "ua";
  plan.decisions.resize(m.task_count());
  for (std::size_t j = 0; j < m.task_count(); ++j) {
    const BestPlacement best = itp(m, j);
    if (best.node) plan.decisions[j] = make_placement(m, j, *best.node, *best.option);
  }
  plan.total_utility = sum_utility(plan.decisions);
  return plan;
}

AssignmentPlan solve_uncapacitated(const Scenario& scenario) {
  return solve_uncapacitated(scenario.nodes, UtilityMatrix::evaluate(scenario));
}

UncapacitatedPass complete_uncapacitated(const std::vector<NodeSpec>& nodes,
                                         const UtilityMatrix& m) {
  check_shape(nodes, m);
  const auto infinite = capacity_filter(nodes, false);
  const auto finite = capacity_filter(nodes, true);
  UncapacitatedPass pass;
  pass.placed.resize(m.task_count());
  for (std::size_t j = 0; j < m.task_count(); ++j) {
    const BestPlacement inf_best = itp(m, j, infinite);
    const BestPlacement cap_best = itp(m, j, finite);
    if (inf_best.node && inf_best.utility >= cap_best.utility) {
      pass.placed[j] = make_placement(m, j, *inf_best.node, *inf_best.option);
    } else {
      pass.residual.push_back(j);
    }
  }
  return pass;
}

CapGainTable capacitated_gains(const std::vector<NodeSpec>& nodes, const UtilityMatrix& m,
                               const std::vector<std::size_t>& residual) {
  check_shape(nodes, m);
  const auto infinite = capacity_filter(nodes, false);
  CapGainTable table;
  table.tasks = residual;
  for (std::size_t z = 0; z < nodes.size(); ++z) {
    if (nodes[z].is_capacitated()) table.cap_nodes.push_back(z);
  }
  for (const std::size_t j : residual) {
    const BestPlacement fallback = itp(m, j, infinite);
    std::vector<double> gains;
    std::vector<LocalBest> locals;
    for (const std::size_t z : table.cap_nodes) {
      const LocalBest local = lqm(m, j, z);
      gains.push_back(local.utility - fallback.utility);
      locals.push_back(local);
    }
    table.gain.push_back(std::move(gains));
    table.local.push_back(std::move(locals));
    table.fallback.push_back(fallback);
  }
  return table;
}

CapacitatedChoice choose_for_capacitated(const std::vector<std::vector<double>>& gains,
                                         int capacity1, int capacity2) {
  if (capacity1 < 0 || capacity2 < 0) throw DomainError("capacities must be >= 0");
  const std::size_t rows = gains.size();
  // Fill levels beyond the number of rows are unreachable.
  const auto c1max = static_cast<std::size_t>(std::min<std::size_t>(capacity1, rows));
  const auto c2max = static_cast<std::size_t>(std::min<std::size_t>(capacity2, rows));
  const std::size_t w1 = c1max + 1;
  const std::size_t w2 = c2max + 1;
  const auto idx = [w1, w2](std::size_t j, std::size_t c1, std::size_t c2) {
    return (j * w1 + c1) * w2 + c2;
  };

  // h(j, c1, c2): best total gain of the first j rows using at most c1 / c2
  // slots. h(0, ., .) = 0; the consuming branches are invalid below fill 0.
  std::vector<double> h((rows + 1) * w1 * w2, 0.0);
  std::vector<unsigned char> choice((rows + 1) * w1 * w2, 0);
  for (std::size_t j = 1; j <= rows; ++j) {
    const auto& g = gains[j - 1];
    const double g1 = g.empty() ? 0.0 : g[0];
    const bool has2 = g.size() > 1;
    const double g2 = has2 ? g[1] : 0.0;
    for (std::size_t c1 = 0; c1 <= c1max; ++c1) {
      for (std::size_t c2 = 0; c2 <= c2max; ++c2) {
        double best = h[idx(j - 1, c1, c2)];
        unsigned char pick = 0;
        if (c1 > 0 && !g.empty()) {
          const double v = h[idx(j - 1, c1 - 1, c2)] + g1;
          if (v > best) {
            best = v;
            pick = 1;
          }
        }
        if (c2 > 0 && has2) {
          const double v = h[idx(j - 1, c1, c2 - 1)] + g2;
          if (v > best) {
            best = v;
            pick = 2;
          }
        }
        h[idx(j, c1, c2)] = best;
        choice[idx(j, c1, c2)] = pick;
      }
    }
  }

  std::size_t b1 = 0;
  std::size_t b2 = 0;
  for (std::size_t c1 = 0; c1 <= c1max; ++c1) {
    for (std::size_t c2 = 0; c2 <= c2max; ++c2) {
      if (h[idx(rows, c1, c2)] > h[idx(rows, b1, b2)]) {
        b1 = c1;
        b2 = c2;
      }
    }
  }

  CapacitatedChoice out;
  out.total_gain = h[idx(rows, b1, b2)];
  for (std::size_t j = rows; j >= 1; --j) {
    switch (choice[idx(j, b1, b2)]) {
      case 1:
        out.first.push_back(j - 1);
        --b1;
        break;
      case 2:
        out.second.push_back(j - 1);
        --b2;
        break;
      default:
        out.unplaced.push_back(j - 1);
        break;
    }
  }
  std::reverse(out.first.begin(), out.first.end());
  std::reverse(out.second.begin(), out.second.end());
  std::reverse(out.unplaced.begin(), out.unplaced.end());
  return out;
}

CapacitatedChoice choose_top_gains(const std::vector<double>& gains, int capacity) {
  if (capacity < 0) throw DomainError("capacity must be >= 0");
  std::vector<std::size_t> order(gains.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  CapacitatedChoice out;
  std::vector<bool> taken(gains.size(), false);
  for (std::size_t k = 0; k < order.size() && out.first.size() < static_cast<std::size_t>(capacity);
       ++k) {
    if (!(gains[order[k]] > 0.0)) break;
    taken[order[k]] = true;
    out.first.push_back(order[k]);
    out.total_gain += gains[order[k]];
  }
  std::sort(out.first.begin(), out.first.end());
  for (std::size_t r = 0; r < gains.size(); ++r) {
    if (!taken[r]) out.unplaced.push_back(r);
  }
  return out;
}

std::vector<std::optional<Placement>> reject_unassignable(const std::vector<std::size_t>& unplaced,
                                                          const CapGainTable& table,
                                                          const UtilityMatrix& m) {
  std::vector<std::optional<Placement>> out;
  out.reserve(unplaced.size());
  for (const std::size_t row : unplaced) {
    const BestPlacement& fb = table.fallback.at(row);
    if (fb.utility > 0.0 && fb.node) {
      out.push_back(make_placement(m, table.tasks[row], *fb.node, *fb.option));
    } else {
      out.emplace_back();
    }
  }
  return out;
}

AssignmentPlan solve_capacitated(const std::vector<NodeSpec>& nodes, const UtilityMatrix& m) {
  check_shape(nodes, m);
  if (nodes.empty()) throw SolverError("capacitated solver needs at least one node");
  const auto n_cap = static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_capacitated(); }));
  if (n_cap > 2) {
    // Each additional capacitated node adds one fill-level dimension to the DP.
    throw SolverError(fmt::format(
        "{} capacitated nodes given; the exact solver supports at most 2", n_cap));
  }

  AssignmentPlan plan;
  plan.solver = "at";
  UncapacitatedPass pass = complete_uncapacitated(nodes, m);
  plan.decisions = std::move(pass.placed);

  const CapGainTable table = capacitated_gains(nodes, m, pass.residual);
  const int cap1 = table.cap_nodes.size() > 0 ? *nodes[table.cap_nodes[0]].capacity : 0;
  const int cap2 = table.cap_nodes.size() > 1 ? *nodes[table.cap_nodes[1]].capacity : 0;

  CapacitatedChoice choice;
  if (table.cap_nodes.size() == 1) {
    std::vector<double> column;
    for (const auto& row : table.gain) column.push_back(row[0]);
    choice = choose_top_gains(column, cap1);
  } else {
    choice = choose_for_capacitated(table.gain, cap1, cap2);
  }

  const auto assign = [&](const std::vector<std::size_t>& rows, std::size_t column) {
    for (const std::size_t row : rows) {
      const std::size_t j = table.tasks[row];
      const LocalBest& local = table.local[row][column];
      plan.decisions[j] = make_placement(m, j, table.cap_nodes[column], *local.option);
    }
  };
  assign(choice.first, 0);
  assign(choice.second, 1);

  const auto fallbacks = reject_unassignable(choice.unplaced, table, m);
  for (std::size_t k = 0; k < choice.unplaced.size(); ++k) {
    plan.decisions[table.tasks[choice.unplaced[k]]] = fallbacks[k];
  }
  plan.total_utility = sum_utility(plan.decisions);
  return plan;
}

AssignmentPlan solve_capacitated(const Scenario& scenario) {
  return solve_capacitated(scenario.nodes, UtilityMatrix::evaluate(scenario));
}

AssignmentPlan brute_force_optimum(const std::vector<NodeSpec>& nodes, const UtilityMatrix& m) {
  check_shape(nodes, m);
  std::size_t max_options = 0;
  for (std::size_t z = 0; z < m.node_count(); ++z) max_options = std::max(max_options, m.option_count(z));
  if (m.task_count() > kBruteForceMaxTasks || nodes.size() > kBruteForceMaxNodes ||
      max_options > kBruteForceMaxOptions) {
    throw SolverError(fmt::format(
        "brute force limited to {} tasks, {} nodes, {} options; got {}, {}, {}",
        kBruteForceMaxTasks, kBruteForceMaxNodes, kBruteForceMaxOptions, m.task_count(),
        nodes.size(), max_options));
  }

  const std::size_t n_tasks = m.task_count();
  const std::size_t n_nodes = nodes.size();
  // Options on one node share its capacity, so only the best one per node can
  // be part of an optimum; every node choice (and rejection) is enumerated.
  std::vector<std::vector<std::optional<std::size_t>>> best_option(n_tasks);
  for (std::size_t j = 0; j < n_tasks; ++j) {
    for (std::size_t z = 0; z < n_nodes; ++z) {
      std::optional<std::size_t> pick;
      double best = -1.0;
      for (std::size_t x = 0; x < m.option_count(z); ++x) {
        const auto& cell = m.at(j, z, x);
        if (!cell || !cell->feasible) continue;
        if (cell->expected_utility > best) {
          best = cell->expected_utility;
          pick = x;
        }
      }
      best_option[j].push_back(pick);
    }
  }

  std::vector<int> remaining(n_nodes);
  for (std::size_t z = 0; z < n_nodes; ++z) {
    remaining[z] = nodes[z].capacity.value_or(static_cast<int>(n_tasks) + 1);
  }
  std::vector<std::optional<Placement>> current(n_tasks);
  std::vector<std::optional<Placement>> best_plan(n_tasks);
  double best_total = -1.0;

  const auto recurse = [&](auto&& self, std::size_t j, double acc) -> void {
    if (j == n_tasks) {
      if (acc > best_total) {
        best_total = acc;
        best_plan = current;
      }
      return;
    }
    current[j].reset();
    self(self, j + 1, acc);
    for (std::size_t z = 0; z < n_nodes; ++z) {
      if (!best_option[j][z] || remaining[z] == 0) continue;
      --remaining[z];
      current[j] = make_placement(m, j, z, *best_option[j][z]);
      self(self, j + 1, acc + current[j]->utility);
      ++remaining[z];
    }
    current[j].reset();
  };
  recurse(recurse, 0, 0.0);

  AssignmentPlan plan;
  plan.solver = "oracle";
  plan.decisions = std::move(best_plan);
  plan.total_utility = sum_utility(plan.decisions);
  return plan;
}

std::vector<std::string> validate_plan(const std::vector<NodeSpec>& nodes, const UtilityMatrix& m,
                                       const AssignmentPlan& plan) {
  std::vector<std::string> problems;
  if (plan.decisions.size() != m.task_count()) {
    problems.push_back(fmt::format("plan has {} decisions for {} tasks", plan.decisions.size(),
                                   m.task_count()));
    return problems;
  }
  std::vector<int> load(nodes.size(), 0);
  double total = 0.0;
  for (std::size_t j = 0; j < plan.decisions.size(); ++j) {
    const auto& d = plan.decisions[j];
    if (!d) continue;
    if (d->node >= nodes.size() || d->option >= m.option_count(d->node)) {
      problems.push_back(fmt::format("task {}: placement ({}, {}) out of range", j, d->node, d->option));
      continue;
    }
    const auto& cell = m.at(j, d->node, d->option);
    if (!cell) {
      problems.push_back(fmt::format("task {}: option {} not offered on node {}", j, d->option, d->node));
      continue;
    }
    if (!cell->feasible) {
      problems.push_back(fmt::format("task {}: risk {:.6g} exceeds its budget", j, cell->risk));
    }
    if (std::abs(cell->expected_utility - d->utility) > 1e-12) {
      problems.push_back(fmt::format("task {}: recorded utility {:.12g} != {:.12g}", j, d->utility,
                                     cell->expected_utility));
    }
    ++load[d->node];
    total += d->utility;
  }
  for (std::size_t z = 0; z < nodes.size(); ++z) {
    if (nodes[z].capacity && load[z] > *nodes[z].capacity) {
      problems.push_back(fmt::format("node '{}': {} tasks exceed capacity {}", nodes[z].id, load[z],
                                     *nodes[z].capacity));
    }
  }
  if (std::abs(total - plan.total_utility) > 1e-9) {
    problems.push_back(fmt::format("total utility {:.12g} != sum of placements {:.12g}",
                                   plan.total_utility, total));
  }
  return problems;
}

}  // namespace fogtap

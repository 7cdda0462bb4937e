#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fogtap/scenario.hpp"
#include "fogtap/utility.hpp"

namespace fogtap {

/// Expected utility and risk for every (task, node, option) of a scenario.
/// An empty cell means the task cannot use that option at all.
class UtilityMatrix {
 public:
  UtilityMatrix() = default;
  UtilityMatrix(std::size_t tasks, const std::vector<std::size_t>& options_per_node);

  /// Evaluates every offered triple of `scenario` through expected_utility.
  static UtilityMatrix evaluate(const Scenario& scenario);

  [[nodiscard]] std::size_t task_count() const { return cells_.size(); }
  [[nodiscard]] std::size_t node_count() const { return options_per_node_.size(); }
  [[nodiscard]] std::size_t option_count(std::size_t node) const { return options_per_node_[node]; }

  [[nodiscard]] std::span<const std::optional<UtilityReport>> options(std::size_t task,
                                                                      std::size_t node) const {
    return cells_[task][node];
  }
  [[nodiscard]] const std::optional<UtilityReport>& at(std::size_t task, std::size_t node,
                                                       std::size_t option) const {
    return cells_[task][node][option];
  }
  void set(std::size_t task, std::size_t node, std::size_t option,
           std::optional<UtilityReport> report) {
    cells_[task][node][option] = report;
  }

 private:
  std::vector<std::size_t> options_per_node_;
  std::vector<std::vector<std::vector<std::optional<UtilityReport>>>> cells_;
};

struct Placement {
  std::size_t node = 0;
  std::size_t option = 0;
  double utility = 0.0;
  double risk = 0.0;
};

/// One decision per task, in task order; an empty decision means rejected.
struct AssignmentPlan {
  std::string solver;
  std::vector<std::optional<Placement>> decisions;
  double total_utility = 0.0;

  [[nodiscard]] std::size_t placed_on(std::size_t node) const;
};

/// Best option on a single node. `option` is empty when nothing useful exists.
struct LocalBest {
  std::optional<std::size_t> option;
  double utility = 0.0;
};

/// Best placement over a set of nodes. `node` is empty when nothing useful exists.
struct BestPlacement {
  std::optional<std::size_t> node;
  std::optional<std::size_t> option;
  double utility = 0.0;
};

/// Local quality maximizer: argmax of utility over risk-feasible options,
/// first index wins ties; returns no option if the best utility is 0.
[[nodiscard]] LocalBest lqm(std::span<const std::optional<UtilityReport>> options);
[[nodiscard]] LocalBest lqm(const UtilityMatrix& m, std::size_t task, std::size_t node);

/// Best (node, option) for one task over the nodes accepted by `node_filter`
/// (all nodes when empty). Lower node index wins ties.
[[nodiscard]] BestPlacement itp(const UtilityMatrix& m, std::size_t task,
                                const std::vector<bool>& node_filter = {});

/// Optimal plan when every node is uncapacitated. Throws SolverError otherwise.
[[nodiscard]] AssignmentPlan solve_uncapacitated(const std::vector<NodeSpec>& nodes,
                                                 const UtilityMatrix& m);
[[nodiscard]] AssignmentPlan solve_uncapacitated(const Scenario& scenario);

struct UncapacitatedPass {
  std::vector<std::optional<Placement>> placed;  // filled for finalized tasks only
  std::vector<std::size_t> residual;             // tasks still competing for capacity
};

/// Finalizes tasks whose best placement is on an uncapacitated node (ties
/// between capacitated and uncapacitated nodes go to the uncapacitated one).
[[nodiscard]] UncapacitatedPass complete_uncapacitated(const std::vector<NodeSpec>& nodes,
                                                       const UtilityMatrix& m);

struct CapGainTable {
  std::vector<std::size_t> tasks;      // residual tasks, one row each
  std::vector<std::size_t> cap_nodes;  // capacitated node indices, column order
  std::vector<std::vector<double>> gain;         // [row][column] = local - fallback
  std::vector<std::vector<LocalBest>> local;     // [row][column]
  std::vector<BestPlacement> fallback;           // best uncapacitated placement per row
};

[[nodiscard]] CapGainTable capacitated_gains(const std::vector<NodeSpec>& nodes,
                                             const UtilityMatrix& m,
                                             const std::vector<std::size_t>& residual);

struct CapacitatedChoice {
  std::vector<std::size_t> first;     // rows assigned to capacitated node 1
  std::vector<std::size_t> second;    // rows assigned to capacitated node 2
  std::vector<std::size_t> unplaced;  // rows left for the fallback step
  double total_gain = 0.0;
};

/// Exact dynamic program over (row, fill of node 1, fill of node 2).
/// `gains[row]` holds one or two entries; a missing second node is capacity 0.
[[nodiscard]] CapacitatedChoice choose_for_capacitated(
    const std::vector<std::vector<double>>& gains, int capacity1, int capacity2);

/// Single capacitated node: the `capacity` rows with the largest positive gains.
[[nodiscard]] CapacitatedChoice choose_top_gains(const std::vector<double>& gains, int capacity);

/// Places rows with a positive fallback utility at their fallback; others stay rejected.
/// Returns one decision per entry of `unplaced`.
[[nodiscard]] std::vector<std::optional<Placement>> reject_unassignable(
    const std::vector<std::size_t>& unplaced, const CapGainTable& table, const UtilityMatrix& m);

/// Four-step exact solver for at most two capacitated nodes.
/// Throws SolverError for more capacitated nodes.
[[nodiscard]] AssignmentPlan solve_capacitated(const std::vector<NodeSpec>& nodes,
                                               const UtilityMatrix& m);
[[nodiscard]] AssignmentPlan solve_capacitated(const Scenario& scenario);

inline constexpr std::size_t kBruteForceMaxTasks = 10;
inline constexpr std::size_t kBruteForceMaxNodes = 4;
inline constexpr std::size_t kBruteForceMaxOptions = 3;

/// Exhaustive search over every capacity-respecting assignment. Test oracle only.
[[nodiscard]] AssignmentPlan brute_force_optimum(const std::vector<NodeSpec>& nodes,
                                                 const UtilityMatrix& m);

/// Lists every violated placement constraint; empty when the plan is feasible.
[[nodiscard]] std::vector<std::string> validate_plan(const std::vector<NodeSpec>& nodes,
                                                     const UtilityMatrix& m,
                                                     const AssignmentPlan& plan);

}  // namespace fogtap

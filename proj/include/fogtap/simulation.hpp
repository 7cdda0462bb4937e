#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fogtap/assigner.hpp"
#include "fogtap/rng.hpp"
#include "fogtap/scenario.hpp"

namespace fogtap {

enum class Baseline {
  kMinLatency,  // smallest median completion time
  kMaxQuality,  // largest intrinsic utility
};

[[nodiscard]] std::string_view baseline_name(Baseline b);
/// Accepts "min-latency" and "max-quality"; throws ValidationError otherwise.
[[nodiscard]] Baseline parse_baseline(std::string_view name);

/// Places every task at the risk-feasible (node, option) that is best by the
/// baseline's single criterion, ties to the lower node then option index.
/// Full capacitated nodes are skipped in task order.
[[nodiscard]] AssignmentPlan run_baseline(const Scenario& scenario, const UtilityMatrix& m,
                                          Baseline strategy);
[[nodiscard]] AssignmentPlan run_baseline(const Scenario& scenario, Baseline strategy);

struct TaskRealization {
  std::vector<double> realized;  // A * f(t) per repetition; zeros when rejected
  double mean = 0.0;
  double std_error = 0.0;
};

struct RealizationSummary {
  double mean = 0.0;       // average utility per task
  double std_error = 0.0;  // across repetitions
};

struct SimulationResult {
  AssignmentPlan plan;
  std::vector<TaskRealization> per_task;
  RealizationSummary overall;
  std::map<std::string, RealizationSummary> baselines;
};

/// Draws completion times for every placed task `reps` times and records the
/// realized utilities. Task j uses sub-stream j of `seed`, so results do not
/// depend on evaluation order. Throws DomainError when reps == 0.
[[nodiscard]] SimulationResult simulate(const Scenario& scenario, const AssignmentPlan& plan,
                                        std::size_t reps, RngSeed seed);

}  // namespace fogtap

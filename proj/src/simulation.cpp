#include "fogtap/simulation.hpp"

#include <cmath>
#include <future>
#include <limits>

#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {

std::string_view baseline_name(Baseline b) {
  return b == Baseline::kMinLatency ? "min-latency" : "max-quality";
}

Baseline parse_baseline(std::string_view name) {
  if (name == "min-latency") return Baseline::kMinLatency;
  if (name == "max-quality") return Baseline::kMaxQuality;
  throw ValidationError(fmt::format("unknown baseline '{}' (min-latency|max-quality)", name));
}

AssignmentPlan run_baseline(const Scenario& scenario, const UtilityMatrix& m, Baseline strategy) {
  AssignmentPlan plan;
  plan.solver = std::string(baseline_name(strategy));
  plan.decisions.resize(scenario.tasks.size());
  std::vector<int> load(scenario.nodes.size(), 0);

  for (std::size_t j = 0; j < scenario.tasks.size(); ++j) {
    const auto& task = scenario.tasks[j];
    std::optional<Placement> best;
    // Lower score is better for both criteria.
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < scenario.nodes.size(); ++z) {
      const auto& node = scenario.nodes[z];
      if (node.capacity && load[z] >= *node.capacity) continue;
      for (std::size_t x = 0; x < node.options.size(); ++x) {
        const auto& cell = m.at(j, z, x);
        if (!cell || !cell->feasible) continue;
        double score = 0.0;
        if (strategy == Baseline::kMinLatency) {
          score = quantile(*scenario.find_latency(j, z, x), 0.5);
        } else {
          score = -task.intrinsic.at(PlacementKey{node.id, node.options[x]});
        }
        if (score < best_score) {
          best_score = score;
          best = Placement{z, x, cell->expected_utility, cell->risk};
        }
      }
    }
    if (best) {
      ++load[best->node];
      plan.decisions[j] = best;
      plan.total_utility += best->utility;
    }
  }
  return plan;
}

AssignmentPlan run_baseline(const Scenario& scenario, Baseline strategy) {
  return run_baseline(scenario, UtilityMatrix::evaluate(scenario), strategy);
}

namespace {

TaskRealization realize_task(const Scenario& scenario, std::size_t j,
                             const std::optional<Placement>& d, std::size_t reps, RngSeed seed) {
  TaskRealization out;
  out.realized.assign(reps, 0.0);
  if (d) {
    const auto& task = scenario.tasks[j];
    const auto& node = scenario.nodes.at(d->node);
    const double a = task.intrinsic.at(PlacementKey{node.id, node.options.at(d->option)});
    const auto* dist = scenario.find_latency(j, d->node, d->option);
    RngStream rng = RngStream::substream(seed, j);
    for (std::size_t r = 0; r < reps; ++r) {
      out.realized[r] = a * task.time_utility(sample_one(*dist, rng));
    }
  }
  double sum = 0.0;
  double sq = 0.0;
  for (double v : out.realized) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(reps);
  out.mean = sum / n;
  const double var = reps > 1 ? std::max(0.0, (sq - n * out.mean * out.mean) / (n - 1.0)) : 0.0;
  out.std_error = std::sqrt(var / n);
  return out;
}

}  // namespace

SimulationResult simulate(const Scenario& scenario, const AssignmentPlan& plan, std::size_t reps,
                          RngSeed seed) {
  if (reps == 0) throw DomainError("simulate: repetitions must be >= 1");
  if (plan.decisions.size() != scenario.tasks.size()) {
    throw ValidationError("simulate: plan does not match the scenario's task list");
  }

  SimulationResult result;
  result.plan = plan;
  std::vector<std::future<TaskRealization>> jobs;
  for (std::size_t j = 0; j < scenario.tasks.size(); ++j) {
    jobs.push_back(std::async(std::launch::async, realize_task, std::cref(scenario), j,
                              std::cref(plan.decisions[j]), reps, seed));
  }
  for (auto& job : jobs) result.per_task.push_back(job.get());

  if (!scenario.tasks.empty()) {
    const double tasks = static_cast<double>(scenario.tasks.size());
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      double avg = 0.0;
      for (const auto& t : result.per_task) avg += t.realized[r];
      avg /= tasks;
      sum += avg;
      sq += avg * avg;
    }
    const double n = static_cast<double>(reps);
    result.overall.mean = sum / n;
    const double var =
        reps > 1 ? std::max(0.0, (sq - n * result.overall.mean * result.overall.mean) / (n - 1.0))
                 : 0.0;
    result.overall.std_error = std::sqrt(var / n);
  }
  return result;
}

}  // namespace fogtap

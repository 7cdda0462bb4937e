#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "fogtap/latency_model.hpp"

namespace fogtap {

/// Full value up to and including `deadline`, nothing afterwards.
struct StepUtility {
  double deadline = 0.0;
};

/// exp(-rate * t).
struct ExpDecayUtility {
  double rate = 1.0;
};

/// Wait-readily-first: 1 until `flat_until`, linear down to 0 at `zero_at`.
struct WaitReadyFirstUtility {
  double flat_until = 0.0;
  double zero_at = 1.0;
};

/// Nonincreasing time-dependent utility f(t) with range [0,1].
class TimeUtility {
 public:
  using Kind = std::variant<StepUtility, ExpDecayUtility, WaitReadyFirstUtility>;

  static TimeUtility step(double deadline);
  static TimeUtility exp_decay(double rate);
  static TimeUtility wait_ready_first(double flat_until, double zero_at);

  [[nodiscard]] const Kind& kind() const { return kind_; }

  [[nodiscard]] double operator()(double t) const;

  /// Largest t with f(t) >= q, for q in (0,1]. f(T) < q exactly when T exceeds it.
  [[nodiscard]] double threshold_for(double q) const;

  /// Time after which the utility is zero; infinite for exponential decay.
  [[nodiscard]] double zero_time() const;

  [[nodiscard]] Transform as_transform() const;

  [[nodiscard]] std::string describe() const;

 private:
  explicit TimeUtility(Kind k) : kind_(k) {}
  Kind kind_;
};

/// Evaluates f at t >= 0.
[[nodiscard]] double eval_time_utility(const TimeUtility& f, double t);

struct PlacementKey {
  std::string node;
  std::string option;

  friend auto operator<=>(const PlacementKey&, const PlacementKey&) = default;
};

struct TaskSpec {
  std::string id;
  TimeUtility time_utility = TimeUtility::step(0.0);
  double quality_floor = 0.0;  // q_j
  double risk_budget = 1.0;    // P'_j
  std::map<PlacementKey, double> intrinsic;  // A_jx, absent pairs are not offered

  /// Throws ValidationError if any probability or utility leaves [0,1].
  void validate() const;
};

struct UtilityReport {
  double expected_utility = 0.0;
  double risk = 0.0;
  bool feasible = true;
};

/// Pr(f(T) < q), computed exactly from the latency CDF.
[[nodiscard]] double risk_probability(const TimeUtility& f, const LatencyDistribution& dist,
                                      double q);

/// Expected utility when combining with intrinsic quality `intrinsic`; the
/// utility is zeroed when the risk exceeds the task's budget.
[[nodiscard]] UtilityReport expected_utility(const TaskSpec& task, double intrinsic,
                                             const LatencyDistribution& dist);

/// Same, looking up A_jx for (node, option). Throws OptionNotOfferedError when
/// the task has no intrinsic utility for that pair.
[[nodiscard]] UtilityReport expected_utility(const TaskSpec& task, const PlacementKey& where,
                                             const LatencyDistribution& dist);

}  // namespace fogtap

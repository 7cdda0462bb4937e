#include "fogtap/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_unit(double v, const char* what, const std::string& task) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError(fmt::format("task {}: {} must lie in [0,1], got {}", task, what, v));
  }
}

}  // namespace

TimeUtility TimeUtility::step(double deadline) {
  if (!std::isfinite(deadline) || deadline < 0.0) {
    throw ValidationError(fmt::format("step utility: deadline must be finite and >= 0, got {}", deadline));
  }
  return TimeUtility(StepUtility{deadline});
}

TimeUtility TimeUtility::exp_decay(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ValidationError(fmt::format("exp utility: rate must be > 0, got {}", rate));
  }
  return TimeUtility(ExpDecayUtility{rate});
}

TimeUtility TimeUtility::wait_ready_first(double flat_until, double zero_at) {
  if (!std::isfinite(flat_until) || !std::isfinite(zero_at) || !(flat_until < zero_at)) {
    throw ValidationError(fmt::format(
        "wait-ready-first utility: requires te < ts, got te={} ts={}", flat_until, zero_at));
  }
  return TimeUtility(WaitReadyFirstUtility{flat_until, zero_at});
}

double TimeUtility::operator()(double t) const {
  return std::visit(Overloaded{
                        [t](const StepUtility& s) { return t <= s.deadline ? 1.0 : 0.0; },
                        [t](const ExpDecayUtility& e) { return std::min(1.0, std::exp(-e.rate * t)); },
                        [t](const WaitReadyFirstUtility& w) {
                          if (t <= w.flat_until) return 1.0;
                          if (t >= w.zero_at) return 0.0;
                          return 1.0 - (t - w.flat_until) / (w.zero_at - w.flat_until);
                        },
                    },
                    kind_);
}

double TimeUtility::threshold_for(double q) const {
  return std::visit(Overloaded{
                        [](const StepUtility& s) { return s.deadline; },
                        [q](const ExpDecayUtility& e) { return -std::log(q) / e.rate; },
                        [q](const WaitReadyFirstUtility& w) {
                          return w.flat_until + (1.0 - q) * (w.zero_at - w.flat_until);
                        },
                    },
                    kind_);
}

double TimeUtility::zero_time() const {
  return std::visit(Overloaded{
                        [](const StepUtility& s) { return s.deadline; },
                        [](const ExpDecayUtility&) { return std::numeric_limits<double>::infinity(); },
                        [](const WaitReadyFirstUtility& w) { return w.zero_at; },
                    },
                    kind_);
}

Transform TimeUtility::as_transform() const {
  Transform g;
  g.eval = [f = *this](double t) { return f(t); };
  std::visit(Overloaded{
                 [&](const StepUtility& s) {
                   g.breakpoints = {s.deadline};
                   g.shape = Transform::Shape::kStep;
                 },
                 [&](const ExpDecayUtility&) { g.shape = Transform::Shape::kGeneral; },
                 [&](const WaitReadyFirstUtility& w) {
                   g.breakpoints = {w.flat_until, w.zero_at};
                   g.shape = Transform::Shape::kPiecewiseLinear;
                 },
             },
             kind_);
  return g;
}

std::string TimeUtility::describe() const {
  return std::visit(
      Overloaded{
          [](const StepUtility& s) { return fmt::format("Step(tv={:g})", s.deadline); },
          [](const ExpDecayUtility& e) { return fmt::format("ExpDecay(k={:g})", e.rate); },
          [](const WaitReadyFirstUtility& w) {
            return fmt::format("WaitReadyFirst(te={:g}, ts={:g})", w.flat_until, w.zero_at);
          },
      },
      kind_);
}

double eval_time_utility(const TimeUtility& f, double t) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("time utility: t must be >= 0, got {}", t));
  return f(t);
}

void TaskSpec::validate() const {
  require_unit(quality_floor, "quality floor", id);
  require_unit(risk_budget, "risk budget", id);
  for (const auto& [key, a] : intrinsic) {
    require_unit(a, fmt::format("intrinsic utility at ({}, {})", key.node, key.option).c_str(), id);
  }
}

double risk_probability(const TimeUtility& f, const LatencyDistribution& dist, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DomainError(fmt::format("risk: quality floor must lie in [0,1], got {}", q));
  }
  if (q == 0.0) return 0.0;
  return 1.0 - cdf(dist, f.threshold_for(q));
}

UtilityReport expected_utility(const TaskSpec& task, double intrinsic,
                               const LatencyDistribution& dist) {
  UtilityReport r;
  r.risk = risk_probability(task.time_utility, dist, task.quality_floor);
  r.feasible = r.risk <= task.risk_budget;
  r.expected_utility =
      r.feasible ? intrinsic * expect_transform(dist, task.time_utility.as_transform()) : 0.0;
  return r;
}

UtilityReport expected_utility(const TaskSpec& task, const PlacementKey& where,
                               const LatencyDistribution& dist) {
  const auto it = task.intrinsic.find(where);
  if (it == task.intrinsic.end()) {
    throw OptionNotOfferedError(fmt::format("task {}: option {} is not offered on node {}",
                                            task.id, where.option, where.node));
  }
  return expected_utility(task, it->second, dist);
}

}  // namespace fogtap

#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "fogtap/errors.hpp"
#include "fogtap/utility.hpp"

using namespace fogtap;

namespace {

TaskSpec task_with(TimeUtility f, double q = 0.0, double budget = 1.0) {
  TaskSpec t;
  t.id = "t";
  t.time_utility = f;
  t.quality_floor = q;
  t.risk_budget = budget;
  t.intrinsic[{"gw", "default"}] = 0.6;
  return t;
}

std::vector<TimeUtility> families() {
  return {TimeUtility::step(0.5), TimeUtility::exp_decay(1.5), TimeUtility::wait_ready_first(0.3, 0.7)};
}

}  // namespace

TEST_CASE("pointwise values") {
  CHECK(eval_time_utility(TimeUtility::step(0.5), 0.5) == 1.0);
  CHECK(eval_time_utility(TimeUtility::step(0.5), std::nextafter(0.5, 1.0)) == 0.0);
  CHECK(eval_time_utility(TimeUtility::wait_ready_first(0.3, 0.4), 0.35) == doctest::Approx(0.5));
  CHECK(eval_time_utility(TimeUtility::exp_decay(1.0), 0.0) == 1.0);
  CHECK(eval_time_utility(TimeUtility::wait_ready_first(0.3, 0.4), 0.3) == 1.0);
  CHECK(eval_time_utility(TimeUtility::wait_ready_first(0.3, 0.4), 0.4) == 0.0);
  CHECK_THROWS_AS((void)eval_time_utility(TimeUtility::step(0.5), -0.1), DomainError);
}

TEST_CASE("families are nonincreasing into [0,1]") {
  for (const auto& f : families()) {
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double v = f(i / 500.0);
      CHECK(v >= 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS((void)TimeUtility::exp_decay(0.0), ValidationError);
  CHECK_THROWS_AS((void)TimeUtility::wait_ready_first(0.4, 0.4), ValidationError);
  CHECK_THROWS_AS((void)TimeUtility::step(-1.0), ValidationError);
  auto t = task_with(TimeUtility::step(0.5));
  t.intrinsic[{"gw", "default"}] = 1.2;
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t = task_with(TimeUtility::step(0.5), 1.5);
  CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("expected utility examples") {
  const auto r1 = expected_utility(task_with(TimeUtility::wait_ready_first(0.3, 0.4)), 0.6,
                                   LatencyDistribution::uniform(0.1, 0.6));
  CHECK(r1.expected_utility == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(r1.feasible);

  const auto r2 = expected_utility(task_with(TimeUtility::wait_ready_first(0.3, 0.9)), 0.9,
                                   LatencyDistribution::uniform(0.3, 0.8));
  CHECK(r2.expected_utility == doctest::Approx(0.525).epsilon(1e-12));

  const auto g = fogtap::testing::reference_gev();
  const auto r3 = expected_utility(task_with(TimeUtility::step(0.5), 0.5, 1.0), 1.0, g);
  CHECK(r3.expected_utility == doctest::Approx(cdf(g, 0.5)).epsilon(1e-12));
  CHECK(r3.feasible);
}

TEST_CASE("step family equals A times cdf for every variant") {
  const std::vector<LatencyDistribution> laws{
      fogtap::testing::reference_gev(), LatencyDistribution::uniform(0.1, 0.6),
      LatencyDistribution::empirical({0.2, 0.4, 0.6, 0.8}), LatencyDistribution::degenerate(0.45),
      LatencyDistribution::mixture({LatencyDistribution::uniform(0.1, 0.6), fogtap::testing::reference_gev()},
                                   {0.5, 0.5})};
  for (const auto& d : laws) {
    for (double tv : {0.2, 0.45, 0.5, 0.7}) {
      const auto r = expected_utility(task_with(TimeUtility::step(tv)), 0.7, d);
      CHECK(std::abs(r.expected_utility - 0.7 * cdf(d, tv)) <= 1e-9);
    }
  }
}

TEST_CASE("utility never exceeds intrinsic quality") {
  const std::vector<LatencyDistribution> laws{fogtap::testing::reference_gev(),
                                              LatencyDistribution::uniform(0.1, 0.6)};
  for (const auto& d : laws) {
    for (const auto& f : families()) {
      for (double a : {0.0, 0.3, 1.0}) {
        const auto r = expected_utility(task_with(f), a, d);
        CHECK(r.expected_utility >= 0.0);
        CHECK(r.expected_utility <= a + 1e-12);
      }
    }
  }
}

TEST_CASE("faster law never yields less utility") {
  const auto fast = LatencyDistribution::uniform(0.1, 0.5);
  const auto slow = LatencyDistribution::uniform(0.2, 0.7);
  const auto gev_fast = LatencyDistribution::gev({0.3, 0.04, 0.40});
  const auto gev_slow = LatencyDistribution::gev({0.3, 0.04, 0.48});
  for (const auto& f : families()) {
    CHECK(expected_utility(task_with(f), 1.0, fast).expected_utility >=
          expected_utility(task_with(f), 1.0, slow).expected_utility);
    CHECK(expected_utility(task_with(f), 1.0, gev_fast).expected_utility >=
          expected_utility(task_with(f), 1.0, gev_slow).expected_utility);
  }
}

TEST_CASE("risk probability") {
  CHECK(risk_probability(TimeUtility::step(0.5), LatencyDistribution::uniform(0.0, 1.0), 0.5) ==
        doctest::Approx(0.5));
  for (const auto& f : families()) {
    CHECK(risk_probability(f, fogtap::testing::reference_gev(), 0.0) == 0.0);
  }
  CHECK(risk_probability(TimeUtility::wait_ready_first(0.3, 0.4), LatencyDistribution::degenerate(0.35), 0.6) ==
        1.0);
  CHECK(risk_probability(TimeUtility::wait_ready_first(0.3, 0.4), LatencyDistribution::degenerate(0.35), 0.5) ==
        0.0);

  const auto g = fogtap::testing::reference_gev();
  for (const auto& f : families()) {
    double prev = 0.0;
    for (int i = 0; i <= 20; ++i) {
      const double r = risk_probability(f, g, i / 20.0);
      CHECK(r >= prev);
      prev = r;
    }
  }
  // exp(-k t) < q  <=>  t > -ln(q)/k
  CHECK(risk_probability(TimeUtility::exp_decay(2.0), g, 0.4) ==
        doctest::Approx(1.0 - cdf(g, -std::log(0.4) / 2.0)).epsilon(1e-12));
}

TEST_CASE("risk budget zeroes infeasible placements") {
  // Single option whose risk exceeds the budget.
  const auto t = task_with(TimeUtility::step(0.5), 0.5, 0.1);
  const auto r = expected_utility(t, 0.9, LatencyDistribution::uniform(0.3, 0.8));
  CHECK(r.risk == doctest::Approx(0.6));
  CHECK_FALSE(r.feasible);
  CHECK(r.expected_utility == 0.0);
}

TEST_CASE("lookup by placement key") {
  const auto t = task_with(TimeUtility::step(0.5));
  CHECK(expected_utility(t, PlacementKey{"gw", "default"}, LatencyDistribution::uniform(0.0, 1.0))
            .expected_utility == doctest::Approx(0.3));
  CHECK_THROWS_AS((void)expected_utility(t, PlacementKey{"cloud", "default"}, LatencyDistribution::uniform(0.0, 1.0)),
                  OptionNotOfferedError);
}

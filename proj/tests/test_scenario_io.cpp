#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"

#include "fogtap/assigner.hpp"
#include "fogtap/errors.hpp"
#include "fogtap/scenario_io.hpp"

using namespace fogtap;
using nlohmann::json;

namespace {

const char* kSmall = R"({
  "name": "small",
  "seed": 3,
  "nodes": [
    {"id": "gw", "capacity": 1, "options": ["fast", "slow"]},
    {"id": "cloud", "capacity": "inf", "options": ["default"]}
  ],
  "tasks": [
    {"id": "a", "utility": {"kind": "step", "tv": 0.5},
     "intrinsic": [{"node": "gw", "option": "fast", "value": 0.5},
                   {"node": "cloud", "option": "default", "value": 0.9}]},
    {"id": "b", "utility": {"kind": "exp", "k": 2.0}, "quality_floor": 0.2, "risk_budget": 0.5,
     "intrinsic": [{"node": "gw", "option": "slow", "value": 0.7}]}
  ],
  "latency": [
    {"task": "*", "node": "gw", "option": "fast", "dist": {"kind": "uniform", "lo": 0.1, "hi": 0.6}},
    {"task": "*", "node": "gw", "option": "slow", "dist": {"kind": "gev", "shape": 0.34, "scale": 0.04, "loc": 0.48}},
    {"task": "a", "node": "cloud", "option": "default",
     "dist": {"kind": "mixture", "weights": [0.5, 0.5],
              "components": [{"kind": "degenerate", "value": 0.3}, {"kind": "empirical", "samples": [0.4, 0.8]}]}}
  ]
})";

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fogtap_test_" + name);
}

}  // namespace

TEST_CASE("parse a scenario") {
  const auto s = parse_scenario(json::parse(kSmall));
  CHECK(s.name == "small");
  CHECK(s.seed == 3u);
  REQUIRE(s.nodes.size() == 2);
  CHECK(s.nodes[0].capacity == 1);
  CHECK_FALSE(s.nodes[1].capacity.has_value());
  REQUIRE(s.tasks.size() == 2);
  CHECK(s.tasks[1].quality_floor == 0.2);
  CHECK(s.tasks[0].risk_budget == 1.0);
  // The wildcard applies only where the task offers the option.
  CHECK(s.find_latency(0, 0, 0) != nullptr);
  CHECK(s.find_latency(1, 0, 1) != nullptr);
  CHECK(s.latency.size() == 3);
}

TEST_CASE("scenario validation errors") {
  auto j = json::parse(kSmall);
  SUBCASE("capacity zero") {
    j["nodes"][0]["capacity"] = 0;
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
  SUBCASE("missing latency") {
    j["latency"].erase(2);
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
  SUBCASE("unknown node in intrinsic") {
    j["tasks"][0]["intrinsic"][0]["node"] = "nowhere";
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
  SUBCASE("intrinsic above one") {
    j["tasks"][0]["intrinsic"][0]["value"] = 1.5;
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
  SUBCASE("mass below zero") {
    j["latency"][0]["dist"]["lo"] = -0.1;
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
  SUBCASE("duplicate task") {
    j["tasks"][1]["id"] = "a";
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
  SUBCASE("unknown distribution kind") {
    j["latency"][0]["dist"]["kind"] = "lognormal";
    CHECK_THROWS_AS((void)parse_scenario(j), ValidationError);
  }
}

TEST_CASE("scenario hash tracks semantic content only") {
  const auto base = parse_scenario(json::parse(kSmall));
  const auto h = scenario_hash(base);

  // Reordered keys and different whitespace.
  const auto reparsed = parse_scenario(json::parse(json::parse(kSmall).dump()));
  CHECK(scenario_hash(reparsed) == h);

  auto renamed = json::parse(kSmall);
  renamed["name"] = "other";
  CHECK(scenario_hash(parse_scenario(renamed)) == h);

  auto changed = json::parse(kSmall);
  changed["tasks"][0]["intrinsic"][0]["value"] = 0.55;
  CHECK(scenario_hash(parse_scenario(changed)) != h);

  auto cap = json::parse(kSmall);
  cap["nodes"][0]["capacity"] = 2;
  CHECK(scenario_hash(parse_scenario(cap)) != h);
}

TEST_CASE("canonical form round trips") {
  const auto s = parse_scenario(json::parse(kSmall));
  const auto again = parse_scenario(scenario_to_json(s));
  CHECK(scenario_hash(again) == scenario_hash(s));
  CHECK(scenario_to_json(again) == scenario_to_json(s));
}

TEST_CASE("plan documents") {
  const auto s = parse_scenario(json::parse(kSmall));
  const auto plan = solve_capacitated(s);
  const auto doc = make_plan_document(s, plan);
  CHECK(doc.scenario_hash == scenario_hash(s));
  CHECK(doc.rows.size() == 2);
  CHECK(plan_from_json(plan_to_json(doc)) == doc);

  const auto csv = plan_to_csv(doc);
  CHECK(csv.rfind("task_id,status,node,option,utility,risk\n", 0) == 0);

  const auto path = temp_path("plan.json");
  emit(doc, EmitFormat::kJson, path);
  std::ifstream in(path);
  CHECK(plan_from_json(json::parse(in)) == doc);
  std::filesystem::remove(path);
}

TEST_CASE("empirical latency from a file") {
  const auto path = temp_path("latencies.txt");
  {
    std::ofstream out(path);
    out << "# seconds\n0.31\n0.35\n\n0.41\n";
  }
  const auto d = distribution_from_json(json{{"kind", "empirical"}, {"file", path.filename().string()}},
                                        path.parent_path());
  CHECK(cdf(d, 0.35) == doctest::Approx(2.0 / 3.0));
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)read_latency_column(path), ValidationError);
}

TEST_CASE("gev from quantiles in a scenario file") {
  const auto d = distribution_from_json(json{{"kind", "gev_quantiles"}, {"median", 0.56}, {"p10", 0.47}, {"p90", 0.89}},
                                        ".");
  CHECK(quantile(d, 0.5) == doctest::Approx(0.56).epsilon(1e-6));
  CHECK_THROWS_AS(
      (void)distribution_from_json(json{{"kind", "gev_quantiles"}, {"median", 4.40}, {"p10", 4.01}, {"p90", 4.77}}, "."),
      FitError);
}

TEST_CASE("bundled scenarios load") {
  for (const auto* name : {"gateway_cloud", "two_capacitated", "inflight_loc4", "inflight_loc6", "inflight_loc10"}) {
    CAPTURE(name);
    const auto s = load_scenario(std::filesystem::path(FOGTAP_SCENARIO_DIR) / (std::string(name) + ".json"));
    CHECK_FALSE(s.tasks.empty());
  }
}

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fogtap/assigner.hpp"
#include "fogtap/latency_model.hpp"
#include "fogtap/scenario.hpp"
#include "fogtap/utility.hpp"

namespace fogtap {

// Distribution records: {"kind": "gev"|"uniform"|"empirical"|"mixture"|
// "degenerate"|"gev_quantiles", ...}. Empirical laws take either "samples"
// or "file" (one latency in seconds per line, relative to `base_dir`).
[[nodiscard]] LatencyDistribution distribution_from_json(const nlohmann::json& j,
                                                         const std::filesystem::path& base_dir = {});
[[nodiscard]] nlohmann::json distribution_to_json(const LatencyDistribution& dist);

// Time-utility records: {"kind":"step","tv":..}, {"kind":"exp","k":..},
// {"kind":"wrf","te":..,"ts":..}.
[[nodiscard]] TimeUtility time_utility_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json time_utility_to_json(const TimeUtility& f);

/// Reads one latency value per line; blank lines and '#' comments are skipped.
[[nodiscard]] std::vector<double> read_latency_column(const std::filesystem::path& path);

[[nodiscard]] Scenario parse_scenario(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {});
/// Parses and validates; errors name the offending file and field.
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Canonical form: wildcards expanded, empirical samples inlined, keys sorted.
[[nodiscard]] nlohmann::json scenario_to_json(const Scenario& scenario);

/// FNV-1a 64 over the canonical semantic content (tasks, nodes, latency), hex.
[[nodiscard]] std::string scenario_hash(const Scenario& scenario);

/// Rounds to 9 significant digits, the precision of every emitted number.
[[nodiscard]] double round_sig9(double v);

struct PlanRow {
  std::string task_id;
  bool placed = false;
  std::string node;
  std::string option;
  double utility = 0.0;
  std::optional<double> risk;

  friend bool operator==(const PlanRow&, const PlanRow&) = default;
};

struct PlanDocument {
  std::string scenario;
  std::string scenario_hash;
  std::string solver;
  double total_utility = 0.0;
  std::vector<PlanRow> rows;

  friend bool operator==(const PlanDocument&, const PlanDocument&) = default;
};

[[nodiscard]] PlanDocument make_plan_document(const Scenario& scenario, const AssignmentPlan& plan);

[[nodiscard]] nlohmann::json plan_to_json(const PlanDocument& doc);
[[nodiscard]] PlanDocument plan_from_json(const nlohmann::json& j);

/// Header `task_id,status,node,option,utility,risk`, one row per task.
[[nodiscard]] std::string plan_to_csv(const PlanDocument& doc);

enum class EmitFormat { kJson, kCsv };

/// Writes the document; throws std::runtime_error on I/O failure.
void emit(const PlanDocument& doc, EmitFormat format, const std::filesystem::path& path);

}  // namespace fogtap

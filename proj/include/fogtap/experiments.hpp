#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fogtap {

/// One comparison printed by `reproduce`: reference value, computed value,
/// and the tolerance band it was judged against.
struct CheckLine {
  std::string label;
  std::string reference;
  std::string computed;
  std::string tolerance;
  bool pass = false;
};

struct ExperimentReport {
  std::string id;
  std::vector<CheckLine> checks;
  double seconds = 0.0;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] std::string render() const;
};

struct ExperimentOptions {
  std::filesystem::path scenario_dir;     // empty: bundled directory
  std::optional<std::uint64_t> seed;      // overrides the bundled seed
  std::optional<std::size_t> runs;        // random_quality repetitions
};

/// Directory holding the bundled scenario files.
[[nodiscard]] std::filesystem::path bundled_scenario_dir();

[[nodiscard]] const std::vector<std::string>& experiment_ids();

/// Runs one bundled experiment. Throws ValidationError for an unknown id.
[[nodiscard]] ExperimentReport reproduce(std::string_view id, const ExperimentOptions& options = {});

/// Gateway-assignment frequency for each task in the randomized-quality
/// experiment, indexed by task position (tasks are ordered by time pressure).
struct RandomQualityResult {
  std::vector<double> gateway_frequency;
  std::size_t runs = 0;
};

[[nodiscard]] RandomQualityResult run_random_quality(const std::filesystem::path& scenario_dir,
                                                     std::size_t runs, std::uint64_t seed,
                                                     int gateway_capacity = 3);

inline constexpr std::uint64_t kRandomQualitySeed = 20180417;
inline constexpr std::size_t kRandomQualityRuns = 10000;

}  // namespace fogtap

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fogtap/latency_model.hpp"
#include "fogtap/utility.hpp"

namespace fogtap {

/// Execution point z. An empty capacity means the node is uncapacitated.
struct NodeSpec {
  std::string id;
  std::optional<int> capacity;
  std::vector<std::string> options;

  [[nodiscard]] bool is_capacitated() const { return capacity.has_value(); }
};

struct LatencyKey {
  std::string task;
  std::string node;
  std::string option;

  friend auto operator<=>(const LatencyKey&, const LatencyKey&) = default;
};

/// Tasks, nodes and the completion-time law of every offered (task, node, option).
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<TaskSpec> tasks;
  std::vector<NodeSpec> nodes;
  std::map<LatencyKey, LatencyDistribution> latency;

  /// Checks every cross-reference and value invariant; throws ValidationError
  /// naming the first violation.
  void validate() const;

  [[nodiscard]] std::optional<std::size_t> node_index(const std::string& id) const;
  [[nodiscard]] std::optional<std::size_t> task_index(const std::string& id) const;
  [[nodiscard]] const LatencyDistribution* find_latency(std::size_t task, std::size_t node,
                                                        std::size_t option) const;
};

}  // namespace fogtap

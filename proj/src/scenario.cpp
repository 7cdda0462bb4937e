#include "fogtap/scenario.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {

void Scenario::validate() const {
  std::set<std::string> node_ids;
  for (const auto& n : nodes) {
    if (n.id.empty()) throw ValidationError("node with empty id");
    if (!node_ids.insert(n.id).second) {
      throw ValidationError(fmt::format("duplicate node id '{}'", n.id));
    }
    if (n.capacity && *n.capacity < 1) {
      throw ValidationError(
          fmt::format("node '{}': finite capacity must be >= 1, got {}", n.id, *n.capacity));
    }
    if (n.options.empty()) throw ValidationError(fmt::format("node '{}': no options", n.id));
    std::set<std::string> opts(n.options.begin(), n.options.end());
    if (opts.size() != n.options.size()) {
      throw ValidationError(fmt::format("node '{}': duplicate option ids", n.id));
    }
  }

  const auto offers = [&](const std::string& node, const std::string& option) {
    const auto z = node_index(node);
    if (!z) return false;
    const auto& opts = nodes[*z].options;
    return std::find(opts.begin(), opts.end(), option) != opts.end();
  };

  std::set<std::string> task_ids;
  for (const auto& t : tasks) {
    if (t.id.empty()) throw ValidationError("task with empty id");
    if (!task_ids.insert(t.id).second) {
      throw ValidationError(fmt::format("duplicate task id '{}'", t.id));
    }
    t.validate();
    for (const auto& [key, a] : t.intrinsic) {
      if (!offers(key.node, key.option)) {
        throw ValidationError(fmt::format("task '{}': intrinsic utility references unknown ({}, {})",
                                          t.id, key.node, key.option));
      }
      if (!latency.contains(LatencyKey{t.id, key.node, key.option})) {
        throw ValidationError(fmt::format("task '{}': no latency distribution for ({}, {})", t.id,
                                          key.node, key.option));
      }
    }
  }

  for (const auto& [key, dist] : latency) {
    if (!task_ids.contains(key.task)) {
      throw ValidationError(fmt::format("latency entry references unknown task '{}'", key.task));
    }
    if (!offers(key.node, key.option)) {
      throw ValidationError(fmt::format("latency entry for task '{}' references unknown ({}, {})",
                                        key.task, key.node, key.option));
    }
    const double lower = dist.support_lower();
    if (lower < 0.0) {
      throw ValidationError(fmt::format(
          "latency for ({}, {}, {}): {} has support starting at {:.6g} s, below zero", key.task,
          key.node, key.option, dist.describe(), lower));
    }
  }
}

std::optional<std::size_t> Scenario::node_index(const std::string& id) const {
  for (std::size_t z = 0; z < nodes.size(); ++z) {
    if (nodes[z].id == id) return z;
  }
  return std::nullopt;
}

std::optional<std::size_t> Scenario::task_index(const std::string& id) const {
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    if (tasks[j].id == id) return j;
  }
  return std::nullopt;
}

const LatencyDistribution* Scenario::find_latency(std::size_t task, std::size_t node,
                                                  std::size_t option) const {
  const auto it =
      latency.find(LatencyKey{tasks.at(task).id, nodes.at(node).id, nodes.at(node).options.at(option)});
  return it == latency.end() ? nullptr : &it->second;
}

}  // namespace fogtap

#include "fogtap/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {
namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double number(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(fmt::format("{}: field '{}' must be a number", where, key));
  return v.get<double>();
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
  }
  const auto& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError(fmt::format("{}: field '{}' must be a string", where, key));
}

std::string kind_of(const json& j, const std::string& where) {
  return string_field(j, "kind", where);
}

std::optional<int> parse_capacity(const json& node, const std::string& where) {
  if (!node.contains("capacity")) return std::nullopt;
  const auto& c = node.at("capacity");
  if (c.is_null()) return std::nullopt;
  if (c.is_string()) {
    const auto s = c.get<std::string>();
    if (s == "inf" || s == "infinite") return std::nullopt;
    throw ValidationError(fmt::format("{}: capacity must be a positive integer or \"inf\"", where));
  }
  if (!c.is_number_integer()) {
    throw ValidationError(fmt::format("{}: capacity must be a positive integer or \"inf\"", where));
  }
  const auto v = c.get<long long>();
  if (v < 1) throw ValidationError(fmt::format("{}: finite capacity must be >= 1, got {}", where, v));
  return static_cast<int>(v);
}

}  // namespace

double round_sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  return std::stod(fmt::format("{:.9g}", v));
}

std::vector<double> read_latency_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open latency file '{}'", path.string()));
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(line.substr(first), &used));
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("{}:{}: not a number: '{}'", path.string(), lineno, line));
    }
  }
  return out;
}

LatencyDistribution distribution_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string where = "distribution";
  const std::string kind = kind_of(j, where);
  if (kind == "gev") {
    return LatencyDistribution::gev(
        GevParams{number(j, "shape", where), number(j, "scale", where), number(j, "loc", where)});
  }
  if (kind == "gev_quantiles") {
    return LatencyDistribution::gev(gev_from_quantiles(
        number(j, "median", where), number(j, "p10", where), number(j, "p90", where)));
  }
  if (kind == "uniform") {
    return LatencyDistribution::uniform(number(j, "lo", where), number(j, "hi", where));
  }
  if (kind == "degenerate") return LatencyDistribution::degenerate(number(j, "value", where));
  if (kind == "empirical") {
    if (j.contains("samples")) {
      return LatencyDistribution::empirical(j.at("samples").get<std::vector<double>>());
    }
    const auto file = string_field(j, "file", where);
    return LatencyDistribution::empirical(read_latency_column(base_dir / file));
  }
  if (kind == "mixture") {
    if (!j.contains("components") || !j.at("components").is_array()) {
      throw ValidationError("mixture: missing 'components' list");
    }
    std::vector<LatencyDistribution> comps;
    for (const auto& c : j.at("components")) comps.push_back(distribution_from_json(c, base_dir));
    if (!j.contains("weights")) throw ValidationError("mixture: missing 'weights' list");
    return LatencyDistribution::mixture(std::move(comps), j.at("weights").get<std::vector<double>>());
  }
  throw ValidationError(fmt::format("unknown distribution kind '{}'", kind));
}

json distribution_to_json(const LatencyDistribution& dist) {
  return std::visit(
      Overloaded{
          [](const GevLaw& g) {
            return json{{"kind", "gev"},
                        {"shape", g.params.shape},
                        {"scale", g.params.scale},
                        {"loc", g.params.location}};
          },
          [](const UniformLaw& u) { return json{{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}}; },
          [](const EmpiricalLaw& e) { return json{{"kind", "empirical"}, {"samples", e.sorted}}; },
          [](const MixtureLaw& m) {
            json comps = json::array();
            for (const auto& c : m.components) comps.push_back(distribution_to_json(c));
            return json{{"kind", "mixture"}, {"components", comps}, {"weights", m.weights}};
          },
          [](const DegenerateLaw& d) { return json{{"kind", "degenerate"}, {"value", d.value}}; },
      },
      dist.law());
}

TimeUtility time_utility_from_json(const json& j) {
  const std::string where = "utility";
  const std::string kind = kind_of(j, where);
  if (kind == "step") return TimeUtility::step(number(j, "tv", where));
  if (kind == "exp") return TimeUtility::exp_decay(number(j, "k", where));
  if (kind == "wrf") return TimeUtility::wait_ready_first(number(j, "te", where), number(j, "ts", where));
  throw ValidationError(fmt::format("unknown utility kind '{}'", kind));
}

json time_utility_to_json(const TimeUtility& f) {
  return std::visit(
      Overloaded{
          [](const StepUtility& s) { return json{{"kind", "step"}, {"tv", s.deadline}}; },
          [](const ExpDecayUtility& e) { return json{{"kind", "exp"}, {"k", e.rate}}; },
          [](const WaitReadyFirstUtility& w) {
            return json{{"kind", "wrf"}, {"te", w.flat_until}, {"ts", w.zero_at}};
          },
      },
      f.kind());
}

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("scenario: top level must be an object");
  Scenario s;
  s.name = j.value("name", std::string{});
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      throw ValidationError("scenario: 'seed' must be a nonnegative integer");
    }
    s.seed = j.at("seed").get<std::uint64_t>();
  }

  if (!j.contains("nodes") || !j.at("nodes").is_array()) {
    throw ValidationError("scenario: missing 'nodes' list");
  }
  for (std::size_t i = 0; i < j.at("nodes").size(); ++i) {
    const auto& n = j.at("nodes")[i];
    const std::string where = fmt::format("nodes[{}]", i);
    NodeSpec node;
    node.id = string_field(n, "id", where);
    node.capacity = parse_capacity(n, where);
    if (!n.contains("options") || !n.at("options").is_array()) {
      throw ValidationError(fmt::format("{}: missing 'options' list", where));
    }
    for (const auto& o : n.at("options")) {
      if (!o.is_string()) throw ValidationError(fmt::format("{}: option ids must be strings", where));
      node.options.push_back(o.get<std::string>());
    }
    s.nodes.push_back(std::move(node));
  }

  const json tasks = j.value("tasks", json::array());
  if (!tasks.is_array()) throw ValidationError("scenario: 'tasks' must be a list");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const std::string where = fmt::format("tasks[{}]", i);
    TaskSpec task;
    task.id = string_field(t, "id", where);
    if (!t.contains("utility")) throw ValidationError(fmt::format("{}: missing 'utility'", where));
    try {
      task.time_utility = time_utility_from_json(t.at("utility"));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", where, e.what()));
    }
    task.quality_floor = t.contains("quality_floor") ? number(t, "quality_floor", where) : 0.0;
    task.risk_budget = t.contains("risk_budget") ? number(t, "risk_budget", where) : 1.0;
    for (const auto& a : t.value("intrinsic", json::array())) {
      const PlacementKey key{string_field(a, "node", where), string_field(a, "option", where)};
      if (!task.intrinsic.emplace(key, number(a, "value", where)).second) {
        throw ValidationError(
            fmt::format("{}: duplicate intrinsic entry ({}, {})", where, key.node, key.option));
      }
    }
    s.tasks.push_back(std::move(task));
  }

  // Entries with task "*" apply to every task offering that placement; explicit
  // entries override them.
  const json latency = j.value("latency", json::array());
  std::map<LatencyKey, LatencyDistribution> explicit_entries;
  std::vector<std::pair<PlacementKey, LatencyDistribution>> wildcard_entries;
  for (std::size_t i = 0; i < latency.size(); ++i) {
    const auto& l = latency[i];
    const std::string where = fmt::format("latency[{}]", i);
    const std::string task = string_field(l, "task", where);
    const PlacementKey key{string_field(l, "node", where), string_field(l, "option", where)};
    if (!l.contains("dist")) throw ValidationError(fmt::format("{}: missing 'dist'", where));
    LatencyDistribution dist = [&] {
      try {
        return distribution_from_json(l.at("dist"), base_dir);
      } catch (const std::exception& e) {
        throw ValidationError(fmt::format("{}: {}", where, e.what()));
      }
    }();
    if (task == "*") {
      wildcard_entries.emplace_back(key, std::move(dist));
    } else if (!explicit_entries.emplace(LatencyKey{task, key.node, key.option}, std::move(dist)).second) {
      throw ValidationError(fmt::format("{}: duplicate latency entry", where));
    }
  }
  for (const auto& [key, dist] : wildcard_entries) {
    for (const auto& t : s.tasks) {
      if (t.intrinsic.contains(key)) s.latency.insert_or_assign(LatencyKey{t.id, key.node, key.option}, dist);
    }
  }
  for (auto& [key, dist] : explicit_entries) s.latency.insert_or_assign(key, std::move(dist));

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open scenario '{}'", path.string()));
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return parse_scenario(j, path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

json scenario_to_json(const Scenario& scenario) {
  json nodes = json::array();
  for (const auto& n : scenario.nodes) {
    nodes.push_back({{"id", n.id},
                     {"capacity", n.capacity ? json(*n.capacity) : json("inf")},
                     {"options", n.options}});
  }
  json tasks = json::array();
  for (const auto& t : scenario.tasks) {
    json intrinsic = json::array();
    for (const auto& [key, a] : t.intrinsic) {
      intrinsic.push_back({{"node", key.node}, {"option", key.option}, {"value", a}});
    }
    tasks.push_back({{"id", t.id},
                     {"utility", time_utility_to_json(t.time_utility)},
                     {"quality_floor", t.quality_floor},
                     {"risk_budget", t.risk_budget},
                     {"intrinsic", intrinsic}});
  }
  json latency = json::array();
  for (const auto& [key, dist] : scenario.latency) {
    latency.push_back({{"task", key.task},
                       {"node", key.node},
                       {"option", key.option},
                       {"dist", distribution_to_json(dist)}});
  }
  return json{{"name", scenario.name},
              {"seed", scenario.seed},
              {"nodes", nodes},
              {"tasks", tasks},
              {"latency", latency}};
}

std::string scenario_hash(const Scenario& scenario) {
  json canonical = scenario_to_json(scenario);
  canonical.erase("name");
  canonical.erase("seed");
  const std::string text = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

PlanDocument make_plan_document(const Scenario& scenario, const AssignmentPlan& plan) {
  if (plan.decisions.size() != scenario.tasks.size()) {
    throw ValidationError(fmt::format("plan has {} decisions for {} tasks", plan.decisions.size(),
                                      scenario.tasks.size()));
  }
  PlanDocument doc;
  doc.scenario = scenario.name;
  doc.scenario_hash = scenario_hash(scenario);
  doc.solver = plan.solver;
  doc.total_utility = round_sig9(plan.total_utility);
  for (std::size_t j = 0; j < plan.decisions.size(); ++j) {
    PlanRow row;
    row.task_id = scenario.tasks[j].id;
    if (const auto& d = plan.decisions[j]) {
      row.placed = true;
      row.node = scenario.nodes.at(d->node).id;
      row.option = scenario.nodes.at(d->node).options.at(d->option);
      row.utility = round_sig9(d->utility);
      row.risk = round_sig9(d->risk);
    }
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

json plan_to_json(const PlanDocument& doc) {
  json rows = json::array();
  for (const auto& r : doc.rows) {
    rows.push_back({{"task_id", r.task_id},
                    {"status", r.placed ? "placed" : "rejected"},
                    {"node", r.placed ? json(r.node) : json(nullptr)},
                    {"option", r.placed ? json(r.option) : json(nullptr)},
                    {"utility", round_sig9(r.utility)},
                    {"risk", r.risk ? json(round_sig9(*r.risk)) : json(nullptr)}});
  }
  return json{{"scenario", doc.scenario},
              {"scenario_hash", doc.scenario_hash},
              {"solver", doc.solver},
              {"total_utility", round_sig9(doc.total_utility)},
              {"tasks", rows}};
}

PlanDocument plan_from_json(const json& j) {
  PlanDocument doc;
  doc.scenario = j.at("scenario").get<std::string>();
  doc.scenario_hash = j.at("scenario_hash").get<std::string>();
  doc.solver = j.at("solver").get<std::string>();
  doc.total_utility = j.at("total_utility").get<double>();
  for (const auto& r : j.at("tasks")) {
    PlanRow row;
    row.task_id = r.at("task_id").get<std::string>();
    const auto status = r.at("status").get<std::string>();
    if (status != "placed" && status != "rejected") {
      throw ValidationError(fmt::format("plan: unknown status '{}'", status));
    }
    row.placed = status == "placed";
    if (row.placed) {
      row.node = r.at("node").get<std::string>();
      row.option = r.at("option").get<std::string>();
    }
    row.utility = r.at("utility").get<double>();
    if (!r.at("risk").is_null()) row.risk = r.at("risk").get<double>();
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

std::string plan_to_csv(const PlanDocument& doc) {
  std::string out = "task_id,status,node,option,utility,risk\n";
  for (const auto& r : doc.rows) {
    out += fmt::format("{},{},{},{},{:.9g},{}\n", r.task_id, r.placed ? "placed" : "rejected", r.node,
                       r.option, r.utility, r.risk ? fmt::format("{:.9g}", *r.risk) : std::string{});
  }
  return out;
}

void emit(const PlanDocument& doc, EmitFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  if (format == EmitFormat::kJson) {
    out << plan_to_json(doc).dump(2) << '\n';
  } else {
    out << plan_to_csv(doc);
  }
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace fogtap

// fogtap: command-line front end for the task placement toolkit.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "fogtap/assigner.hpp"
#include "fogtap/bench_net.hpp"
#include "fogtap/characterizer.hpp"
#include "fogtap/errors.hpp"
#include "fogtap/experiments.hpp"
#include "fogtap/latency_model.hpp"
#include "fogtap/scenario_io.hpp"
#include "fogtap/simulation.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct OutputOptions {
  std::string format = "json";
  std::string out;
};

void add_output_flags(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--format", o.format, "Plan format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "Write the plan here instead of stdout");
}

void write_plan(const fogtap::Scenario& s, const fogtap::AssignmentPlan& plan, const OutputOptions& o) {
  const auto doc = fogtap::make_plan_document(s, plan);
  const auto fmt = o.format == "csv" ? fogtap::EmitFormat::kCsv : fogtap::EmitFormat::kJson;
  if (!o.out.empty()) {
    fogtap::emit(doc, fmt, o.out);
  } else if (fmt == fogtap::EmitFormat::kCsv) {
    std::cout << fogtap::plan_to_csv(doc);
  } else {
    std::cout << fogtap::plan_to_json(doc).dump(2) << '\n';
  }
}

fogtap::AssignmentPlan run_solver(const fogtap::Scenario& s, const fogtap::UtilityMatrix& m,
                                  const std::string& solver) {
  if (solver == "ua") return fogtap::solve_uncapacitated(s.nodes, m);
  if (solver == "at") return fogtap::solve_capacitated(s.nodes, m);
  if (solver == "oracle") return fogtap::brute_force_optimum(s.nodes, m);
  const bool capacitated =
      std::any_of(s.nodes.begin(), s.nodes.end(), [](const auto& n) { return n.is_capacitated(); });
  return capacitated ? fogtap::solve_capacitated(s.nodes, m) : fogtap::solve_uncapacitated(s.nodes, m);
}

json summary_json(const fogtap::RealizationSummary& r) {
  return json{{"mean", fogtap::round_sig9(r.mean)}, {"std_error", fogtap::round_sig9(r.std_error)}};
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw fogtap::ValidationError("--bind expects host:port");
  try {
    return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
  } catch (const std::exception&) {
    throw fogtap::ValidationError(fmt::format("bad port in --bind '{}'", bind));
  }
}

fogtap::bench::BenchServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fog task admission and placement toolkit"};
  app.require_subcommand(1);

  // solve
  std::string scenario_path;
  std::string solver = "auto";
  OutputOptions solve_out;
  auto* solve = app.add_subcommand("solve", "Compute an optimal assignment plan");
  solve->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  solve->add_option("--solver", solver, "Solver")->check(CLI::IsMember({"auto", "ua", "at", "oracle"}));
  add_output_flags(solve, solve_out);

  // baseline
  std::string strategy;
  OutputOptions base_out;
  auto* baseline = app.add_subcommand("baseline", "Assign by a single-criterion baseline");
  baseline->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  baseline->add_option("--strategy", strategy, "min-latency or max-quality")->required();
  add_output_flags(baseline, base_out);

  // simulate
  std::size_t reps = 10000;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo realized utility of a plan and the baselines");
  simulate->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "RNG seed (default: the scenario's)");
  simulate->add_option("--solver", solver, "Solver")->check(CLI::IsMember({"auto", "ua", "at", "oracle"}));

  // reproduce
  std::string experiment;
  fogtap::ExperimentOptions exp_opts;
  std::string scenario_dir;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::size_t> exp_runs;
  auto* reproduce = app.add_subcommand("reproduce", "Run a bundled experiment and compare with reference values");
  reproduce->add_option("id", experiment, "Experiment id, or 'all'")->required();
  reproduce->add_option("--scenario-dir", scenario_dir, "Directory with the bundled scenarios");
  reproduce->add_option("--seed", exp_seed, "Override the bundled seed");
  reproduce->add_option("--runs", exp_runs, "Repetitions for random_quality");

  // characterize
  std::string records_path;
  bool serverless = false;
  fogtap::RegimeConfig regimes;
  auto* characterize = app.add_subcommand("characterize", "Summarize probe records as JSON");
  characterize->add_option("records", records_path, "Probe record CSV")->required()->check(CLI::ExistingFile);
  characterize->add_flag("--serverless", serverless, "Also fit warm/cold regimes against delta_t");
  characterize->add_option("--lo", regimes.lo, "Warm threshold (s)");
  characterize->add_option("--hi", regimes.hi, "Cold threshold (s)");
  characterize->add_option("--bucket", regimes.bucket_width, "Intermediate bucket width (s)");

  // fit-gev
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  auto* fit = app.add_subcommand("fit-gev", "GEV parameters from a median and 10th/90th percentiles");
  fit->add_option("--median", median)->required();
  fit->add_option("--p10", p10)->required();
  fit->add_option("--p90", p90)->required();

  // serve
  std::string bind = "127.0.0.1:8080";
  std::string dataset;
  bool loose = false;
  auto* serve = app.add_subcommand("serve", "Run the benchmark server");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--dataset", dataset, "Numeric CSV dataset")->required();
  serve->add_flag("--allow-out-of-range", loose, "Accept amounts outside the standard ranges");

  // probe
  std::string schedule_path;
  std::string probe_out;
  auto* probe = app.add_subcommand("probe", "Invoke benchmark endpoints and record latencies");
  probe->add_option("--schedule", schedule_path, "Schedule JSON")->required()->check(CLI::ExistingFile);
  probe->add_option("--out", probe_out, "Record CSV (overrides the schedule)");

  // gen-dataset
  std::string gen_out;
  std::size_t gen_lines = fogtap::bench::kMinDatasetLines;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-dataset", "Write a seeded numeric CSV dataset");
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--lines", gen_lines)->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      const auto s = fogtap::load_scenario(scenario_path);
      write_plan(s, run_solver(s, fogtap::UtilityMatrix::evaluate(s), solver), solve_out);
    } else if (*baseline) {
      const auto s = fogtap::load_scenario(scenario_path);
      write_plan(s, fogtap::run_baseline(s, fogtap::parse_baseline(strategy)), base_out);
    } else if (*simulate) {
      const auto s = fogtap::load_scenario(scenario_path);
      const auto m = fogtap::UtilityMatrix::evaluate(s);
      const fogtap::RngSeed seed{sim_seed.value_or(s.seed)};
      const auto plan = run_solver(s, m, solver);
      auto result = fogtap::simulate(s, plan, reps, seed);
      for (auto b : {fogtap::Baseline::kMinLatency, fogtap::Baseline::kMaxQuality}) {
        result.baselines[std::string(fogtap::baseline_name(b))] =
            fogtap::simulate(s, fogtap::run_baseline(s, m, b), reps, seed).overall;
      }
      json tasks = json::array();
      for (std::size_t j = 0; j < s.tasks.size(); ++j) {
        tasks.push_back({{"task_id", s.tasks[j].id},
                         {"expected", fogtap::round_sig9(plan.decisions[j] ? plan.decisions[j]->utility : 0.0)},
                         {"mean", fogtap::round_sig9(result.per_task[j].mean)},
                         {"std_error", fogtap::round_sig9(result.per_task[j].std_error)}});
      }
      json baselines = json::object();
      for (const auto& [name, r] : result.baselines) baselines[name] = summary_json(r);
      const json doc{{"scenario", s.name},
                     {"scenario_hash", fogtap::scenario_hash(s)},
                     {"solver", plan.solver},
                     {"reps", reps},
                     {"seed", seed.value},
                     {"expected_average", fogtap::round_sig9(plan.total_utility / static_cast<double>(s.tasks.size()))},
                     {"realized_average", summary_json(result.overall)},
                     {"tasks", tasks},
                     {"baselines", baselines}};
      std::cout << doc.dump(2) << '\n';
    } else if (*reproduce) {
      exp_opts.scenario_dir = scenario_dir;
      exp_opts.seed = exp_seed;
      exp_opts.runs = exp_runs;
      std::vector<std::string> ids;
      if (experiment == "all") {
        ids = fogtap::experiment_ids();
      } else {
        ids.push_back(experiment);
      }
      bool ok = true;
      for (const auto& id : ids) {
        const auto report = fogtap::reproduce(id, exp_opts);
        std::cout << report.render();
        ok = ok && report.passed();
      }
      return ok ? 0 : 1;
    } else if (*characterize) {
      const auto records = fogtap::bench::read_records(records_path);
      json summaries = json::array();
      for (const auto& s : fogtap::bench::summarize(records)) {
        summaries.push_back({{"endpoint", s.endpoint},
                             {"option", s.option},
                             {"n", s.count},
                             {"median", fogtap::round_sig9(s.median)},
                             {"p10", fogtap::round_sig9(s.p10)},
                             {"p90", fogtap::round_sig9(s.p90)},
                             {"sp", fogtap::round_sig9(s.spread)}});
      }
      std::size_t failed = 0;
      for (const auto& r : records) failed += r.ok() ? 0 : 1;
      json doc{{"records", records.size()}, {"failed", failed}, {"summaries", summaries}};
      if (serverless) {
        std::vector<fogtap::TimedLatency> timed;
        for (const auto& r : records) {
          if (r.ok() && r.delta_t_s) timed.push_back({*r.delta_t_s, r.latency_s});
        }
        const auto model = fogtap::fit_serverless_regimes(timed, regimes);
        json buckets = json::array();
        for (const auto& b : model.buckets) {
          buckets.push_back({{"start", b.start},
                             {"end", b.end},
                             {"n", b.count},
                             {"warm_weight", fogtap::round_sig9(b.warm_weight)},
                             {"distance", fogtap::round_sig9(b.distance)}});
        }
        doc["serverless"] = {{"lo", model.lo}, {"hi", model.hi}, {"buckets", buckets}};
      }
      std::cout << doc.dump(2) << '\n';
    } else if (*fit) {
      const auto g = fogtap::gev_from_quantiles(median, p10, p90);
      std::cout << json{{"kind", "gev"}, {"shape", g.shape}, {"scale", g.scale}, {"loc", g.location}}.dump(2)
                << '\n';
    } else if (*serve) {
      const auto [host, port] = split_bind(bind);
      fogtap::bench::BenchServer server(fogtap::bench::ServerConfig{host, port, dataset, loose});
      server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving on " << server.base_url() << '\n';
      server.run();
      g_server = nullptr;
    } else if (*probe) {
      auto schedule = fogtap::bench::load_schedule(schedule_path);
      if (!probe_out.empty()) schedule.out = probe_out;
      if (schedule.out.empty()) throw fogtap::ValidationError("probe: no output path (--out or schedule 'out')");
      const auto records = fogtap::bench::probe(schedule, [](const fogtap::bench::ProbeRecord& r) {
        std::cerr << fogtap::bench::format_record(r) << '\n';
      });
      fogtap::bench::write_records(schedule.out, records);
    } else if (*gen) {
      fogtap::bench::write_dataset(gen_out, gen_lines, gen_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "fogtap: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

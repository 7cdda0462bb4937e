// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

#include "fogtap/assigner.hpp"
#include "fogtap/bench_net.hpp"
#include "fogtap/characterizer.hpp"
#include "fogtap/experiments.hpp"
#include "fogtap/latency_model.hpp"
#include "fogtap/utility.hpp"

using namespace fogtap;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

Outcome from_report(const std::string& id) {
  const auto r = reproduce(id);
  std::string detail;
  for (const auto& c : r.checks) {
    if (!detail.empty()) detail += "; ";
    detail += fmt::format("{} {} (ref {})", c.label, c.computed, c.reference);
    if (!c.pass) detail += " [miss]";
  }
  return {r.passed(), detail};
}

Outcome oracle_equivalence() {
  RngStream rng(RngSeed{6006});
  std::size_t mismatches = 0;
  std::size_t infeasible = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto s = fogtap::testing::random_instance(rng, 8);
    const auto m = UtilityMatrix::evaluate(s);
    const auto plan = solve_capacitated(s.nodes, m);
    const auto best = brute_force_optimum(s.nodes, m);
    const double gap = std::abs(plan.total_utility - best.total_utility);
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++mismatches;
    if (!validate_plan(s.nodes, m, plan).empty()) ++infeasible;
  }
  return {mismatches == 0 && infeasible == 0,
          fmt::format("200 instances, {} mismatches, {} infeasible plans, worst gap {:.3g}", mismatches,
                      infeasible, worst)};
}

Outcome expectation_engine() {
  const std::vector<std::pair<std::string, LatencyDistribution>> laws{
      {"gev", fogtap::testing::reference_gev()},
      {"uniform", LatencyDistribution::uniform(0.1, 0.6)},
      {"empirical", LatencyDistribution::empirical({0.21, 0.35, 0.42, 0.5, 0.77})},
      {"mixture", LatencyDistribution::mixture({LatencyDistribution::uniform(0.1, 0.3),
                                                LatencyDistribution::gev({0.3, 0.1, 0.6})},
                                               {0.4, 0.6})},
  };
  const std::vector<std::pair<std::string, TimeUtility>> families{
      {"step", TimeUtility::step(0.5)},
      {"exp", TimeUtility::exp_decay(2.0)},
      {"wrf", TimeUtility::wait_ready_first(0.3, 0.7)},
  };
  constexpr std::size_t kDraws = 200000;
  constexpr double kIntrinsic = 0.8;
  double worst_mc = 0.0;
  double worst_step = 0.0;
  std::uint64_t stream = 0;
  for (const auto& [law_name, law] : laws) {
    for (const auto& [family_name, f] : families) {
      auto rng = RngStream::substream(RngSeed{7007}, stream++);
      double sum = 0.0;
      for (double t : sample(law, rng, kDraws)) sum += f(t);
      const double mc = sum / static_cast<double>(kDraws);
      worst_mc = std::max(worst_mc, std::abs(expect_transform(law, f.as_transform()) - mc));
    }
    TaskSpec task;
    task.id = "t";
    task.time_utility = TimeUtility::step(0.5);
    task.intrinsic[{"n", "o"}] = kIntrinsic;
    const auto r = expected_utility(task, kIntrinsic, law);
    worst_step = std::max(worst_step, std::abs(r.expected_utility - kIntrinsic * cdf(law, 0.5)));
  }
  return {worst_mc < 0.005 && worst_step <= 1e-9,
          fmt::format("12 cases, worst |quadrature - MC| {:.2e}, worst step gap {:.2e}", worst_mc, worst_step)};
}

Outcome sampler_fidelity() {
  const std::vector<std::pair<std::string, LatencyDistribution>> laws{
      {"gev", fogtap::testing::reference_gev()},
      {"uniform", LatencyDistribution::uniform(0.1, 0.6)},
      {"mixture", LatencyDistribution::mixture({LatencyDistribution::uniform(0.1, 0.3),
                                                fogtap::testing::reference_gev()},
                                               {0.3, 0.7})},
  };
  constexpr std::size_t kDraws = 5000;
  const double critical = fogtap::testing::ks_critical_001(kDraws);
  bool pass = true;
  std::string detail;
  std::uint64_t seed = 8008;
  for (const auto& [name, law] : laws) {
    RngStream rng(RngSeed{seed++});
    const double d = fogtap::testing::ks_statistic(sample(law, rng, kDraws), law);
    pass = pass && d < critical;
    detail += fmt::format("{} D={:.4f} ", name, d);
  }
  detail += fmt::format("(critical {:.4f})", critical);
  return {pass, detail};
}

Outcome cdf_learning() {
  const auto curve = error_curve(fogtap::testing::reference_gev(), {10, 30, 90, 270}, 100, RngSeed{9009});
  bool decreasing = true;
  std::string detail = "mean avg distance:";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    detail += fmt::format(" N={} {:.4f}", curve.points[i].n, curve.points[i].mean_avg);
    if (i > 0 && !(curve.points[i].mean_avg < curve.points[i - 1].mean_avg)) decreasing = false;
  }
  const double ratio = curve.points[0].mean_avg / curve.points[2].mean_avg;
  detail += fmt::format("; ratio N=10/N=90 {:.3f}", ratio);
  return {decreasing && ratio >= 2.0 && ratio <= 4.5, detail};
}

Outcome serverless_round_trip() {
  const auto warm = fogtap::testing::reference_gev();
  const auto cold = LatencyDistribution::gev({0.2, 0.3, 2.0});
  const auto model = ServerlessModel::linear(warm, cold, 10.0, 60.0);

  bool endpoints = true;
  for (double t : {0.3, 0.48, 0.6, 1.0, 2.0, 3.0}) {
    endpoints = endpoints && cdf(serverless_latency(model, 0.0), t) == cdf(warm, t) &&
                cdf(serverless_latency(model, 10.0), t) == cdf(warm, t) &&
                cdf(serverless_latency(model, 60.0), t) == cdf(cold, t) &&
                cdf(serverless_latency(model, 300.0), t) == cdf(cold, t);
  }

  RngStream rng(RngSeed{10010});
  std::vector<TimedLatency> records;
  for (int i = 0; i < 16000; ++i) {
    const double dt = rng.uniform(0.0, 80.0);
    records.push_back({dt, sample_one(serverless_latency(model, dt), rng)});
  }
  const auto fit = fit_serverless_regimes(records);
  double worst = 0.0;
  std::size_t fewest = static_cast<std::size_t>(-1);
  for (const auto& b : fit.buckets) {
    worst = std::max(worst, std::abs(b.warm_weight - model.mixing(0.5 * (b.start + b.end))));
    fewest = std::min(fewest, b.count);
  }
  const bool pass = endpoints && fit.buckets.size() == 5 && fewest >= 200 && worst <= 0.1;
  return {pass, fmt::format("{} buckets, fewest records {}, worst |w_fit - w| {:.3f}, regime endpoints {}",
                            fit.buckets.size(), fewest, worst, endpoints ? "exact" : "mismatch")};
}

double two_pass_mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / v.size());
}

double two_pass_stdev(const std::vector<double>& v) {
  const long double m = two_pass_mean(v);
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return static_cast<double>(std::sqrt(ss / v.size()));
}

bool close9(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

Outcome bench_harness() {
  using namespace fogtap::bench;
  const auto dataset = std::filesystem::temp_directory_path() / "fogtap_acceptance_dataset.csv";
  write_dataset(dataset, kMinDatasetLines, 11011);
  BenchServer server(ServerConfig{"127.0.0.1", 0, dataset, true});
  server.start();
  const auto url = server.base_url();
  std::vector<std::string> problems;

  ProbeSchedule schedule;
  schedule.endpoints = {{url, {TaskKind::kPic, 5000}}, {url, {TaskKind::kPsf, 500}}, {url, {TaskKind::kFsp, 500}}};
  schedule.count = 50;
  const auto rows = probe(schedule);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& e = schedule.endpoints[i % 3];
    if (r.ok() && r.endpoint == url + e.task.path() && r.option == e.task.option() && r.latency_s > 0.0 &&
        r.exec_ms && *r.exec_ms <= r.latency_s * 1000.0 && r.timestamp_unix_ms > 0 &&
        parse_record(format_record(r)).status == 200) {
      ++valid;
    }
  }
  if (rows.size() != 50 || valid != 50) problems.push_back(fmt::format("{}/{} valid records", valid, rows.size()));

  httplib::Client client(url);
  const auto pic = client.Get("/pic?iters=1");
  if (!pic || pic->status != 200 || json::parse(pic->body).at("result").get<double>() != 4.0) {
    problems.push_back("pic(iters=1) != 4.0");
  }

  const auto data = load_dataset(dataset);
  const std::vector<double> head(data.begin(), data.begin() + 2000);
  const auto psf = client.Get("/psf?lines=2000");
  if (!psf || psf->status != 200) {
    problems.push_back("psf request failed");
  } else {
    const auto b = json::parse(psf->body);
    if (!close9(b.at("mean").get<double>(), two_pass_mean(head)) ||
        !close9(b.at("stdev").get<double>(), two_pass_stdev(head))) {
      problems.push_back("psf statistics differ from the reference");
    }
  }
  const auto payload = generate_csv(1000, 42);
  const auto fsp = client.Post("/fsp", payload, "text/csv");
  if (!fsp || fsp->status != 200) {
    problems.push_back("fsp request failed");
  } else {
    const auto b = json::parse(fsp->body);
    const auto column = first_column(payload);
    if (!close9(b.at("mean").get<double>(), two_pass_mean(column)) ||
        !close9(b.at("stdev").get<double>(), two_pass_stdev(column))) {
      problems.push_back("fsp statistics differ from the reference");
    }
  }
  server.stop();
  std::filesystem::remove(dataset);

  const auto s = summarize_latencies({3, 1, 4, 10, 5, 9, 2, 6, 8, 7});
  if (s.median != 5 || s.p10 != 1 || s.p90 != 9 || s.spread != 8) problems.push_back("nearest-rank summary");

  std::string detail = problems.empty() ? "50/50 records valid, pic=4.0, psf/fsp match, summary 5/1/9/8" : "";
  for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "uncapacitated split", 1.0, [] { return from_report("uncap_split"); }},
      {2, "utility comparison", 1.0, [] { return from_report("min_max_compare"); }},
      {3, "capacity sweep", 1.0, [] { return from_report("cap_sweep"); }},
      {4, "randomized quality", 60.0, [] { return from_report("random_quality"); }},
      {5, "two capacitated nodes", 1.0, [] { return from_report("two_capacitated"); }},
      {6, "oracle equivalence", 120.0, oracle_equivalence},
      {7, "expectation engine", 30.0, expectation_engine},
      {8, "sampler fidelity", 5.0, sampler_fidelity},
      {9, "cdf learning", 10.0, cdf_learning},
      {10, "serverless model", 10.0, serverless_round_trip},
      {11, "bench harness", 30.0, bench_harness},
      {12, "in-flight monotonicity", 10.0, [] { return from_report("inflight_demo"); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    if (!pass) ++failures;
    std::printf("criterion %2d %s %s (%.2f s, limit %.0f s): %s\n", c.number, pass ? "PASS" : "FAIL",
                c.name.c_str(), secs, c.limit_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

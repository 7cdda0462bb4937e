#include "fogtap/bench_net.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "httplib.h"
#include "json.hpp"

#include "fogtap/errors.hpp"
#include "fogtap/rng.hpp"

namespace fogtap::bench {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

std::optional<std::size_t> parse_count(std::string_view s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void reply_error(httplib::Response& res, int status, const std::string& reason) {
  res.status = status;
  res.set_content(json{{"error", reason}}.dump(), "application/json");
}

json stats_json(const ColumnStats& s, double exec_ms) {
  return json{{"lines", s.count}, {"mean", s.mean}, {"stdev", s.stdev},
              {"min", s.min},     {"max", s.max},   {"exec_ms", exec_ms}};
}

}  // namespace

std::string BenchTask::path() const {
  return fmt::format("/{}", task_kind_name(kind));
}

std::string BenchTask::option() const {
  return fmt::format("{}={}", kind == TaskKind::kPic ? "iters" : "lines", amount);
}

AmountRange allowed_range(TaskKind kind) {
  switch (kind) {
    case TaskKind::kPic: return {5000, 500000};
    case TaskKind::kPsf: return {500, 50000};
    case TaskKind::kFsp: return {500, 10000};
  }
  throw ValidationError("unknown task kind");
}

void validate_task(const BenchTask& task, bool allow_out_of_range) {
  if (task.amount == 0) {
    throw ValidationError(fmt::format("{}: {} must be >= 1", task_kind_name(task.kind), task.option()));
  }
  const auto r = allowed_range(task.kind);
  if (!allow_out_of_range && (task.amount < r.lo || task.amount > r.hi)) {
    throw ValidationError(fmt::format("{}: {} outside [{}, {}]", task_kind_name(task.kind),
                                      task.option(), r.lo, r.hi));
  }
}

std::string_view task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kPic: return "pic";
    case TaskKind::kPsf: return "psf";
    case TaskKind::kFsp: return "fsp";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "pic") return TaskKind::kPic;
  if (name == "psf") return TaskKind::kPsf;
  if (name == "fsp") return TaskKind::kFsp;
  throw ValidationError(fmt::format("unknown bench task '{}' (pic|psf|fsp)", name));
}

double leibniz_pi(std::size_t iters) {
  double sum = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    const double term = 1.0 / (2.0 * static_cast<double>(k) + 1.0);
    sum += (k % 2 == 0) ? term : -term;
  }
  return 4.0 * sum;
}

ColumnStats column_stats(std::span<const double> values) {
  if (values.empty()) throw DomainError("column_stats: no values");
  ColumnStats s;
  s.min = values.front();
  s.max = values.front();
  double m2 = 0.0;
  for (double v : values) {
    ++s.count;
    const double delta = v - s.mean;
    s.mean += delta / static_cast<double>(s.count);
    m2 += delta * (v - s.mean);
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.stdev = std::sqrt(std::max(0.0, m2 / static_cast<double>(s.count)));
  return s;
}

std::vector<double> first_column(std::string_view csv, std::size_t max_lines) {
  std::vector<double> out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < csv.size() && out.size() < max_lines) {
    auto end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    const auto line = csv.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto field = line.substr(0, line.find(','));
    const auto v = parse_double(field);
    if (!v) throw ValidationError(fmt::format("line {}: not a number: '{}'", lineno, field));
    out.push_back(*v);
  }
  return out;
}

std::string generate_csv(std::size_t lines, std::uint64_t seed) {
  RngStream rng(RngSeed{seed});
  std::string out;
  out.reserve(lines * 20);
  for (std::size_t i = 0; i < lines; ++i) {
    out += fmt::format("{:.6f},{}\n", rng.uniform(0.0, 1000.0), i);
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, std::size_t lines, std::uint64_t seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError(fmt::format("cannot write dataset '{}'", path.string()));
  f << generate_csv(lines, seed);
}

std::vector<double> load_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError(fmt::format("dataset '{}' not found", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  auto values = first_column(ss.str());
  if (values.size() < kMinDatasetLines) {
    throw ValidationError(fmt::format("dataset '{}' has {} lines, need at least {}", path.string(),
                                      values.size(), kMinDatasetLines));
  }
  return values;
}

// ---------------------------------------------------------------- server

struct BenchServer::Impl {
  httplib::Server http;
  std::vector<double> dataset;
  std::thread worker;
  bool bound = false;
};

BenchServer::BenchServer(ServerConfig config)
    : impl_(std::make_unique<Impl>()), config_(std::move(config)) {
  impl_->dataset = load_dataset(config_.dataset);
  const bool loose = config_.allow_out_of_range;
  const auto& data = impl_->dataset;

  auto amount_of = [loose](const httplib::Request& req, TaskKind kind, const char* key,
                           httplib::Response& res) -> std::optional<std::size_t> {
    if (!req.has_param(key)) {
      reply_error(res, 400, fmt::format("missing parameter '{}'", key));
      return std::nullopt;
    }
    const auto v = parse_count(req.get_param_value(key));
    if (!v) {
      reply_error(res, 400, fmt::format("parameter '{}' is not a count", key));
      return std::nullopt;
    }
    try {
      validate_task(BenchTask{kind, *v}, loose);
    } catch (const ValidationError& e) {
      reply_error(res, 400, e.what());
      return std::nullopt;
    }
    return v;
  };

  impl_->http.Get("/pic", [amount_of](const httplib::Request& req, httplib::Response& res) {
    const auto iters = amount_of(req, TaskKind::kPic, "iters", res);
    if (!iters) return;
    const auto t0 = Clock::now();
    const double pi = leibniz_pi(*iters);
    const double ms = elapsed_ms(t0);
    res.set_content(json{{"result", pi}, {"iters", *iters}, {"exec_ms", ms}}.dump(), "application/json");
  });

  impl_->http.Get("/psf", [amount_of, &data](const httplib::Request& req, httplib::Response& res) {
    const auto lines = amount_of(req, TaskKind::kPsf, "lines", res);
    if (!lines) return;
    if (*lines > data.size()) {
      reply_error(res, 400, fmt::format("dataset holds only {} lines", data.size()));
      return;
    }
    const auto t0 = Clock::now();
    const auto stats = column_stats(std::span<const double>(data.data(), *lines));
    res.set_content(stats_json(stats, elapsed_ms(t0)).dump(), "application/json");
  });

  impl_->http.Post("/fsp", [loose](const httplib::Request& req, httplib::Response& res) {
    const auto t0 = Clock::now();
    std::vector<double> values;
    try {
      values = first_column(req.body);
      validate_task(BenchTask{TaskKind::kFsp, values.size()}, loose);
    } catch (const ValidationError& e) {
      reply_error(res, 400, e.what());
      return;
    }
    if (req.has_param("lines")) {
      const auto declared = parse_count(req.get_param_value("lines"));
      if (!declared || *declared != values.size()) {
        reply_error(res, 400, fmt::format("declared lines do not match the {} posted", values.size()));
        return;
      }
    }
    const auto stats = column_stats(values);
    res.set_content(stats_json(stats, elapsed_ms(t0)).dump(), "application/json");
  });
}

BenchServer::~BenchServer() { stop(); }

int BenchServer::bind() {
  if (impl_->bound) return port_;
  if (config_.port == 0) {
    port_ = impl_->http.bind_to_any_port(config_.host);
    if (port_ < 0) throw ValidationError(fmt::format("cannot bind {}", config_.host));
  } else {
    if (!impl_->http.bind_to_port(config_.host, config_.port)) {
      throw ValidationError(fmt::format("cannot bind {}:{}", config_.host, config_.port));
    }
    port_ = config_.port;
  }
  impl_->bound = true;
  return port_;
}

void BenchServer::run() {
  bind();
  impl_->http.listen_after_bind();
}

void BenchServer::start() {
  bind();
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void BenchServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

std::string BenchServer::base_url() const {
  return fmt::format("http://{}:{}", config_.host, port_);
}

// ---------------------------------------------------------------- probe

std::string_view probe_mode_name(ProbeMode mode) {
  switch (mode) {
    case ProbeMode::kRoundRobin: return "round_robin";
    case ProbeMode::kFixedDelay: return "fixed";
    case ProbeMode::kRandomDelay: return "random";
  }
  return "?";
}

ProbeMode parse_probe_mode(std::string_view name) {
  if (name == "round_robin") return ProbeMode::kRoundRobin;
  if (name == "fixed") return ProbeMode::kFixedDelay;
  if (name == "random") return ProbeMode::kRandomDelay;
  throw ValidationError(fmt::format("unknown probe mode '{}' (round_robin|fixed|random)", name));
}

void ProbeSchedule::validate() const {
  if (endpoints.empty()) throw ValidationError("schedule: no endpoints");
  if (count == 0 && !duration_s) throw ValidationError("schedule: set 'count' or 'duration_s'");
  if (duration_s && !(*duration_s > 0.0)) throw ValidationError("schedule: duration_s must be > 0");
  if (mode == ProbeMode::kFixedDelay && !(delta_t_s >= 0.0)) {
    throw ValidationError("schedule: delta_t_s must be >= 0");
  }
  if (mode == ProbeMode::kRandomDelay && !(max_delta_t_s > 0.0)) {
    throw ValidationError("schedule: max_delta_t_s must be > 0");
  }
  if (!(timeout_s > 0.0)) throw ValidationError("schedule: timeout_s must be > 0");
  for (const auto& e : endpoints) {
    if (e.base_url.empty()) throw ValidationError("schedule: endpoint without url");
    validate_task(e.task, allow_out_of_range);
  }
}

ProbeSchedule parse_schedule(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("schedule: {}", e.what()));
  }
  ProbeSchedule s;
  try {
    for (const auto& e : j.at("endpoints")) {
      ProbeEndpoint ep;
      ep.base_url = e.at("url").get<std::string>();
      ep.task.kind = parse_task_kind(e.at("task").get<std::string>());
      const char* key = ep.task.kind == TaskKind::kPic ? "iters" : "lines";
      ep.task.amount = e.at(key).get<std::size_t>();
      s.endpoints.push_back(std::move(ep));
    }
    s.mode = parse_probe_mode(j.value("mode", std::string("round_robin")));
    s.count = j.value("count", std::size_t{0});
    if (j.contains("duration_s")) s.duration_s = j.at("duration_s").get<double>();
    s.delta_t_s = j.value("delta_t_s", 0.0);
    s.max_delta_t_s = j.value("max_delta_t_s", 0.0);
    s.seed = j.value("seed", std::uint64_t{1});
    s.timeout_s = j.value("timeout_s", 10.0);
    s.allow_out_of_range = j.value("allow_out_of_range", false);
    if (j.contains("out")) s.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("schedule: {}", e.what()));
  }
  s.validate();
  return s;
}

ProbeSchedule load_schedule(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError(fmt::format("cannot open schedule '{}'", path.string()));
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_schedule(ss.str());
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<ProbeRecord> probe(const ProbeSchedule& schedule, const RecordSink& sink) {
  schedule.validate();
  RngStream delays = RngStream::substream(RngSeed{schedule.seed}, 0);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(schedule.timeout_s));

  std::vector<ProbeRecord> records;
  std::vector<std::optional<Clock::time_point>> last_start(schedule.endpoints.size());
  std::optional<Clock::time_point> prev_start;
  const auto run_start = Clock::now();

  for (std::size_t k = 0;; ++k) {
    if (schedule.count > 0 && k >= schedule.count) break;
    if (schedule.duration_s &&
        std::chrono::duration<double>(Clock::now() - run_start).count() >= *schedule.duration_s) {
      break;
    }
    const std::size_t idx = k % schedule.endpoints.size();
    const auto& ep = schedule.endpoints[idx];

    if (prev_start && schedule.mode != ProbeMode::kRoundRobin) {
      const double wait = schedule.mode == ProbeMode::kFixedDelay
                              ? schedule.delta_t_s
                              : delays.uniform(0.0, schedule.max_delta_t_s);
      std::this_thread::sleep_until(
          *prev_start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait)));
    }

    std::string payload;
    if (ep.task.kind == TaskKind::kFsp) {
      payload = generate_csv(ep.task.amount, mix_seed(schedule.seed ^ (k + 1)));
    }

    ProbeRecord rec;
    rec.endpoint = ep.base_url + ep.task.path();
    rec.option = ep.task.option();
    const auto start = Clock::now();
    rec.timestamp_unix_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::system_clock::now().time_since_epoch())
                                .count();
    if (last_start[idx]) rec.delta_t_s = std::chrono::duration<double>(start - *last_start[idx]).count();
    last_start[idx] = start;
    prev_start = start;

    httplib::Client client(ep.base_url);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    const std::string target = ep.task.path() + "?" + ep.task.option();
    auto res = ep.task.kind == TaskKind::kFsp ? client.Post(target, payload, "text/csv")
                                              : client.Get(target);
    rec.latency_s = std::chrono::duration<double>(Clock::now() - start).count();

    if (res) {
      rec.status = res->status;
      if (res->status == 200) {
        try {
          rec.exec_ms = json::parse(res->body).at("exec_ms").get<double>();
        } catch (const json::exception&) {
          rec.exec_ms.reset();
        }
      }
    }
    if (sink) sink(rec);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string format_record(const ProbeRecord& r) {
  return fmt::format("{},{:.9f},{},{},{},{},{}", r.delta_t_s ? fmt::format("{:.9f}", *r.delta_t_s) : "",
                     r.latency_s, r.endpoint, r.option, r.timestamp_unix_ms, r.status,
                     r.exec_ms ? fmt::format("{:.6f}", *r.exec_ms) : "");
}

ProbeRecord parse_record(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = split(line, ',');
  if (f.size() != 5 && f.size() != 7) {
    throw ValidationError(fmt::format("record has {} fields, expected 5 or 7", f.size()));
  }
  ProbeRecord r;
  if (!f[0].empty()) {
    r.delta_t_s = parse_double(f[0]);
    if (!r.delta_t_s) throw ValidationError(fmt::format("bad delta_t_s '{}'", f[0]));
  }
  const auto lat = parse_double(f[1]);
  if (!lat) throw ValidationError(fmt::format("bad latency_s '{}'", f[1]));
  r.latency_s = *lat;
  r.endpoint = std::string(f[2]);
  r.option = std::string(f[3]);
  const auto ts = parse_double(f[4]);
  if (!ts) throw ValidationError(fmt::format("bad timestamp_unix_ms '{}'", f[4]));
  r.timestamp_unix_ms = static_cast<std::int64_t>(*ts);
  r.status = 200;
  if (f.size() == 7) {
    const auto st = parse_count(f[5]);
    if (!st) throw ValidationError(fmt::format("bad status '{}'", f[5]));
    r.status = static_cast<int>(*st);
    if (!f[6].empty()) {
      r.exec_ms = parse_double(f[6]);
      if (!r.exec_ms) throw ValidationError(fmt::format("bad exec_ms '{}'", f[6]));
    }
  }
  return r;
}

void write_records(const std::filesystem::path& path, std::span<const ProbeRecord> records) {
  std::ofstream f(path);
  if (!f) throw ValidationError(fmt::format("cannot write records '{}'", path.string()));
  f << kRecordHeader << '\n';
  for (const auto& r : records) f << format_record(r) << '\n';
}

std::vector<ProbeRecord> read_records(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError(fmt::format("cannot open records '{}'", path.string()));
  std::vector<ProbeRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (lineno == 1 && line.rfind("delta_t_s", 0) == 0) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InsufficientDataError("nearest_rank: empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError(fmt::format("nearest_rank: p={} outside (0, 1]", p));
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LatencySummary summarize_latencies(std::vector<double> latencies) {
  if (latencies.empty()) throw InsufficientDataError("summarize: no successful records");
  std::sort(latencies.begin(), latencies.end());
  LatencySummary s;
  s.count = latencies.size();
  s.median = nearest_rank(latencies, 0.5);
  s.p10 = nearest_rank(latencies, 0.1);
  s.p90 = nearest_rank(latencies, 0.9);
  s.spread = s.p90 - s.p10;
  return s;
}

std::vector<LatencySummary> summarize(std::span<const ProbeRecord> records) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    auto key = std::make_pair(r.endpoint, r.option);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.latency_s);
  }
  if (order.empty()) throw InsufficientDataError("summarize: no successful records");
  std::vector<LatencySummary> out;
  for (const auto& key : order) {
    auto s = summarize_latencies(std::move(groups[key]));
    s.endpoint = key.first;
    s.option = key.second;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fogtap::bench

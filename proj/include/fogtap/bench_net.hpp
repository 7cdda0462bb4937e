#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fogtap::bench {

enum class TaskKind { kPic, kPsf, kFsp };

// `amount` is the iteration count for PIC and the line count for PSF/FSP.
struct BenchTask {
  TaskKind kind = TaskKind::kPic;
  std::size_t amount = 5000;

  [[nodiscard]] std::string path() const;    // "/pic", "/psf", "/fsp"
  [[nodiscard]] std::string option() const;  // "iters=5000", "lines=500"
};

struct AmountRange {
  std::size_t lo;
  std::size_t hi;
};
[[nodiscard]] AmountRange allowed_range(TaskKind kind);

// Throws ValidationError when the amount is zero, or outside the allowed range
// and `allow_out_of_range` is false.
void validate_task(const BenchTask& task, bool allow_out_of_range);

[[nodiscard]] std::string_view task_kind_name(TaskKind kind);
[[nodiscard]] TaskKind parse_task_kind(std::string_view name);

// 4 * sum_{k<iters} (-1)^k / (2k+1), summed in index order.
[[nodiscard]] double leibniz_pi(std::size_t iters);

struct ColumnStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stdev = 0.0;  // population form
  double min = 0.0;
  double max = 0.0;
};

// Throws DomainError on an empty input.
[[nodiscard]] ColumnStats column_stats(std::span<const double> values);

// First comma-separated field of up to `max_lines` non-empty lines.
// Throws ValidationError on a non-numeric field.
[[nodiscard]] std::vector<double> first_column(std::string_view csv,
                                               std::size_t max_lines = static_cast<std::size_t>(-1));

inline constexpr std::size_t kMinDatasetLines = 50000;

[[nodiscard]] std::string generate_csv(std::size_t lines, std::uint64_t seed);
void write_dataset(const std::filesystem::path& path, std::size_t lines, std::uint64_t seed);
// Throws ValidationError if the file is missing or shorter than kMinDatasetLines.
[[nodiscard]] std::vector<double> load_dataset(const std::filesystem::path& path);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path dataset;
  bool allow_out_of_range = false;
};

class BenchServer {
 public:
  explicit BenchServer(ServerConfig config);
  ~BenchServer();
  BenchServer(const BenchServer&) = delete;
  BenchServer& operator=(const BenchServer&) = delete;

  // Binds the socket and returns the bound port.
  int bind();
  // Serves until stop(); binds first if needed.
  void run();
  // Serves on a background thread.
  void start();
  void stop();

  [[nodiscard]] int port() const { return port_; }
  [[nodiscard]] std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServerConfig config_;
  int port_ = -1;
};

enum class ProbeMode { kRoundRobin, kFixedDelay, kRandomDelay };

[[nodiscard]] std::string_view probe_mode_name(ProbeMode mode);
[[nodiscard]] ProbeMode parse_probe_mode(std::string_view name);

struct ProbeEndpoint {
  std::string base_url;  // "http://host:port"
  BenchTask task;
};

struct ProbeSchedule {
  std::vector<ProbeEndpoint> endpoints;
  ProbeMode mode = ProbeMode::kRoundRobin;
  std::size_t count = 0;                  // 0: run until duration_s elapses
  std::optional<double> duration_s;
  double delta_t_s = 0.0;                 // fixed mode
  double max_delta_t_s = 0.0;             // random mode
  std::uint64_t seed = 1;                 // random delays and FSP payloads
  double timeout_s = 10.0;
  bool allow_out_of_range = false;
  std::filesystem::path out;

  void validate() const;
};

[[nodiscard]] ProbeSchedule load_schedule(const std::filesystem::path& path);
[[nodiscard]] ProbeSchedule parse_schedule(std::string_view json_text);

struct ProbeRecord {
  std::optional<double> delta_t_s;  // empty for the first call of an endpoint
  double latency_s = 0.0;
  std::string endpoint;
  std::string option;
  std::int64_t timestamp_unix_ms = 0;
  int status = 0;  // HTTP status, 0 for transport failure
  std::optional<double> exec_ms;

  [[nodiscard]] bool ok() const { return status == 200; }
};

using RecordSink = std::function<void(const ProbeRecord&)>;

// Invokes the schedule strictly sequentially. Failures become rows with
// their status; the run continues.
std::vector<ProbeRecord> probe(const ProbeSchedule& schedule, const RecordSink& sink = {});

inline constexpr std::string_view kRecordHeader =
    "delta_t_s,latency_s,endpoint,option,timestamp_unix_ms,status,exec_ms";

[[nodiscard]] std::string format_record(const ProbeRecord& r);
[[nodiscard]] ProbeRecord parse_record(std::string_view line);
void write_records(const std::filesystem::path& path, std::span<const ProbeRecord> records);
[[nodiscard]] std::vector<ProbeRecord> read_records(const std::filesystem::path& path);

struct LatencySummary {
  std::string endpoint;
  std::string option;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double spread = 0.0;  // p90 - p10
  std::size_t count = 0;
};

// Nearest-rank: the ceil(p * n)-th smallest value.
[[nodiscard]] double nearest_rank(std::span<const double> sorted, double p);

// Throws InsufficientDataError on an empty input.
[[nodiscard]] LatencySummary summarize_latencies(std::vector<double> latencies);

// One summary per (endpoint, option) over successful rows, in first-seen order.
// Throws InsufficientDataError when no row succeeded.
[[nodiscard]] std::vector<LatencySummary> summarize(std::span<const ProbeRecord> records);

}  // namespace fogtap::bench

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "fogtap/bench_net.hpp"
#include "fogtap/errors.hpp"

using namespace fogtap;
using namespace fogtap::bench;
using nlohmann::json;

namespace {

// Two-pass reference statistics in long double.
struct RefStats {
  long double mean = 0, stdev = 0, min = 0, max = 0;
};

RefStats reference_stats(const std::vector<double>& v) {
  RefStats r;
  long double sum = 0;
  r.min = r.max = v.front();
  for (double x : v) {
    sum += x;
    r.min = std::min<long double>(r.min, x);
    r.max = std::max<long double>(r.max, x);
  }
  r.mean = sum / v.size();
  long double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.stdev = std::sqrt(ss / v.size());
  return r;
}

bool close(double a, long double b) { return std::abs(a - b) <= 1e-9 * std::max<long double>(1.0L, std::abs(b)); }

struct Fixture {
  std::filesystem::path dataset = std::filesystem::temp_directory_path() / "fogtap_bench_dataset.csv";
  std::unique_ptr<BenchServer> server;

  Fixture() {
    write_dataset(dataset, kMinDatasetLines, 17);
    server = std::make_unique<BenchServer>(ServerConfig{"127.0.0.1", 0, dataset, false});
    server->start();
  }
  ~Fixture() {
    server->stop();
    std::filesystem::remove(dataset);
  }
};

}  // namespace

TEST_CASE("leibniz partial sums") {
  CHECK(leibniz_pi(1) == 4.0);
  CHECK(leibniz_pi(2) == 4.0 - 4.0 / 3.0);
  CHECK(leibniz_pi(5000) == leibniz_pi(5000));
  CHECK(std::abs(leibniz_pi(500000) - M_PI) < 1e-5);
}

TEST_CASE("column statistics") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto s = column_stats(v);
  CHECK(s.mean == 2.5);
  CHECK(s.stdev == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  CHECK(column_stats(std::vector<double>{7.0}).stdev == 0.0);
  CHECK_THROWS_AS((void)column_stats(std::vector<double>{}), DomainError);
  CHECK(first_column("1.5,x\n\n2.5,y\n", 10) == std::vector<double>{1.5, 2.5});
  CHECK_THROWS_AS((void)first_column("abc,1\n"), ValidationError);
}

TEST_CASE("task ranges") {
  CHECK_NOTHROW(validate_task({TaskKind::kPic, 5000}, false));
  CHECK_THROWS_AS(validate_task({TaskKind::kPic, 1}, false), ValidationError);
  CHECK_NOTHROW(validate_task({TaskKind::kPic, 1}, true));
  CHECK_THROWS_AS(validate_task({TaskKind::kFsp, 20000}, false), ValidationError);
  CHECK_THROWS_AS(validate_task({TaskKind::kPsf, 0}, true), ValidationError);
}

TEST_CASE("nearest-rank summaries") {
  const auto s = summarize_latencies({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(s.median == 5);
  CHECK(s.p10 == 1);
  CHECK(s.p90 == 9);
  CHECK(s.spread == 8);
  CHECK(s.count == 10);
  const auto one = summarize_latencies({0.4});
  CHECK(one.median == 0.4);
  CHECK(one.p10 == 0.4);
  CHECK(one.p90 == 0.4);
  CHECK(one.spread == 0.0);
  CHECK_THROWS_AS((void)summarize_latencies({}), InsufficientDataError);

  ProbeRecord failed;
  failed.status = 0;
  const std::vector<ProbeRecord> all_failed{failed, failed};
  CHECK_THROWS_AS((void)summarize(all_failed), InsufficientDataError);
}

TEST_CASE("record format round trip") {
  ProbeRecord r;
  r.delta_t_s = 0.5;
  r.latency_s = 0.0123;
  r.endpoint = "http://127.0.0.1:9/pic";
  r.option = "iters=5000";
  r.timestamp_unix_ms = 1700000000000;
  r.status = 200;
  r.exec_ms = 1.25;
  const auto back = parse_record(format_record(r));
  CHECK(back.delta_t_s == r.delta_t_s);
  CHECK(back.latency_s == doctest::Approx(r.latency_s));
  CHECK(back.endpoint == r.endpoint);
  CHECK(back.status == 200);
  CHECK(back.exec_ms == doctest::Approx(1.25));

  ProbeRecord first;
  first.endpoint = "e";
  first.option = "o";
  const auto f = parse_record(format_record(first));
  CHECK_FALSE(f.delta_t_s.has_value());
  CHECK_FALSE(f.exec_ms.has_value());
  // Five-column files carry only successes.
  CHECK(parse_record("0.1,0.2,e,o,5").ok());
  CHECK_THROWS_AS((void)parse_record("1,2,3"), ValidationError);
}

TEST_CASE("schedule parsing") {
  const auto s = parse_schedule(R"({"endpoints": [{"url": "http://127.0.0.1:1", "task": "psf", "lines": 500}],
                                    "mode": "random", "max_delta_t_s": 300, "count": 5})");
  CHECK(s.mode == ProbeMode::kRandomDelay);
  CHECK(s.endpoints[0].task.kind == TaskKind::kPsf);
  CHECK_THROWS_AS((void)parse_schedule(R"({"endpoints": [], "count": 1})"), ValidationError);
  CHECK_THROWS_AS((void)parse_schedule(R"({"endpoints": [{"url": "u", "task": "pic", "iters": 1}], "count": 1})"),
                  ValidationError);
}

TEST_CASE("dataset requirements") {
  const auto short_file = std::filesystem::temp_directory_path() / "fogtap_short.csv";
  write_dataset(short_file, 100, 1);
  CHECK_THROWS_AS((void)load_dataset(short_file), ValidationError);
  CHECK_THROWS_AS(BenchServer(ServerConfig{"127.0.0.1", 0, short_file, false}), ValidationError);
  std::filesystem::remove(short_file);
  CHECK_THROWS_AS((void)load_dataset("/nonexistent/fogtap.csv"), ValidationError);
}

TEST_CASE("server endpoints") {
  Fixture fx;
  httplib::Client client(fx.server->base_url());

  auto pic = client.Get("/pic?iters=1");
  REQUIRE(pic);
  CHECK(pic->status == 400);
  fogtap::bench::BenchServer loose(ServerConfig{"127.0.0.1", 0, fx.dataset, true});
  loose.start();
  httplib::Client loose_client(loose.base_url());
  pic = loose_client.Get("/pic?iters=1");
  REQUIRE(pic);
  REQUIRE(pic->status == 200);
  CHECK(json::parse(pic->body).at("result").get<double>() == 4.0);
  loose.stop();

  pic = client.Get("/pic?iters=5000");
  REQUIRE(pic);
  CHECK(json::parse(pic->body).at("result").get<double>() == leibniz_pi(5000));
  CHECK(json::parse(pic->body).contains("exec_ms"));

  const auto data = load_dataset(fx.dataset);
  auto psf = client.Get("/psf?lines=500");
  REQUIRE(psf);
  REQUIRE(psf->status == 200);
  const auto ref = reference_stats(std::vector<double>(data.begin(), data.begin() + 500));
  const auto body = json::parse(psf->body);
  CHECK(close(body.at("mean").get<double>(), ref.mean));
  CHECK(close(body.at("stdev").get<double>(), ref.stdev));
  CHECK(close(body.at("min").get<double>(), ref.min));
  CHECK(close(body.at("max").get<double>(), ref.max));

  const auto payload = generate_csv(500, 99);
  auto fsp = client.Post("/fsp?lines=500", payload, "text/csv");
  REQUIRE(fsp);
  REQUIRE(fsp->status == 200);
  const auto fref = reference_stats(first_column(payload));
  CHECK(close(json::parse(fsp->body).at("mean").get<double>(), fref.mean));
  CHECK(close(json::parse(fsp->body).at("stdev").get<double>(), fref.stdev));

  for (const char* bad : {"/pic", "/pic?iters=abc", "/pic?iters=-5", "/psf?lines=60000", "/psf?lines=10"}) {
    CAPTURE(bad);
    auto r = client.Get(bad);
    REQUIRE(r);
    CHECK(r->status == 400);
  }
  auto short_post = client.Post("/fsp", "1\n2\n", "text/csv");
  REQUIRE(short_post);
  CHECK(short_post->status == 400);
  auto mismatch = client.Post("/fsp?lines=501", payload, "text/csv");
  REQUIRE(mismatch);
  CHECK(mismatch->status == 400);
}

TEST_CASE("probe schedules") {
  Fixture fx;
  const auto url = fx.server->base_url();

  SUBCASE("round robin") {
    ProbeSchedule s;
    s.endpoints = {{url, {TaskKind::kPic, 5000}}, {url, {TaskKind::kPsf, 500}}};
    s.count = 10;
    const auto rows = probe(s);
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].endpoint == url + (i % 2 == 0 ? "/pic" : "/psf"));
      CHECK(rows[i].ok());
      REQUIRE(rows[i].exec_ms);
      CHECK(rows[i].latency_s * 1000.0 >= *rows[i].exec_ms);
    }
    CHECK_FALSE(rows[0].delta_t_s);
    CHECK_FALSE(rows[1].delta_t_s);
    CHECK(rows[2].delta_t_s);
  }

  SUBCASE("fixed delay") {
    ProbeSchedule s;
    s.endpoints = {{url, {TaskKind::kPic, 5000}}};
    s.mode = ProbeMode::kFixedDelay;
    s.delta_t_s = 0.2;
    s.count = 5;
    const auto rows = probe(s);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      REQUIRE(rows[i].delta_t_s);
      CHECK(*rows[i].delta_t_s >= 0.2);
      CHECK(*rows[i].delta_t_s < 0.2 + 0.1);
    }
  }

  SUBCASE("server stopped mid-run") {
    ProbeSchedule s;
    s.endpoints = {{url, {TaskKind::kPic, 5000}}};
    s.count = 6;
    s.timeout_s = 2.0;
    std::size_t seen = 0;
    const auto rows = probe(s, [&](const ProbeRecord&) {
      if (++seen == 3) fx.server->stop();
    });
    REQUIRE(rows.size() == 6);
    CHECK(rows[2].ok());
    for (std::size_t i = 3; i < rows.size(); ++i) CHECK(rows[i].status == 0);

    const auto path = std::filesystem::temp_directory_path() / "fogtap_probe.csv";
    write_records(path, rows);
    const auto back = read_records(path);
    CHECK(back.size() == 6);
    CHECK(summarize(back).front().count == 3);
    std::filesystem::remove(path);
  }
}

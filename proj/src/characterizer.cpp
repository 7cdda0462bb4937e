#include "fogtap/characterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {

EcdfEstimate::EcdfEstimate(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw ValidationError("ecdf: no samples");
  for (double s : sorted_) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ValidationError(fmt::format("ecdf: samples must be finite and >= 0, got {}", s));
    }
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EcdfEstimate::operator()(double t) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

LatencyDistribution EcdfEstimate::to_distribution() const {
  return LatencyDistribution::empirical(sorted_);
}

EcdfEstimate estimate_cdf(std::vector<double> samples) { return EcdfEstimate(std::move(samples)); }

CdfDistance cdf_distance(const CdfFunction& a, const CdfFunction& b, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("cdf distance: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("cdf distance: grid not sorted");
  CdfDistance d;
  double sum = 0.0;
  for (double t : grid) {
    const double diff = std::abs(a(t) - b(t));
    sum += diff;
    d.max = std::max(d.max, diff);
  }
  d.avg = sum / static_cast<double>(grid.size());
  return d;
}

std::vector<double> distance_grid(const LatencyDistribution& a, const LatencyDistribution& b,
                                  std::size_t quantile_points) {
  std::vector<double> grid;
  for (const auto* d : {&a, &b}) {
    for (double x : d->atoms()) {
      grid.push_back(x);
      grid.push_back(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    }
    for (std::size_t i = 0; i < quantile_points; ++i) {
      const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(quantile_points);
      grid.push_back(quantile(*d, p));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

CdfDistance cdf_distance(const LatencyDistribution& a, const LatencyDistribution& b) {
  const auto grid = distance_grid(a, b);
  return cdf_distance([&](double t) { return cdf(a, t); }, [&](double t) { return cdf(b, t); },
                      grid);
}

CdfErrorCurve error_curve(const LatencyDistribution& reference,
                          const std::vector<std::size_t>& n_grid, std::size_t reps, RngSeed seed) {
  if (reps == 0) throw DomainError("error curve: reps must be >= 1");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw DomainError("error curve: sample counts must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw DomainError("error curve: sample counts must be strictly increasing");
    }
  }

  CdfErrorCurve curve;
  for (const std::size_t n : n_grid) {
    ErrorCurvePoint point;
    point.n = n;
    for (std::size_t r = 0; r < reps; ++r) {
      RngStream rng = RngStream::substream(seed, (static_cast<std::uint64_t>(n) << 32) | r);
      const auto estimate = estimate_cdf(sample(reference, rng, n)).to_distribution();
      point.reps.push_back(cdf_distance(reference, estimate));
    }
    for (const auto& d : point.reps) {
      point.mean_avg += d.avg;
      point.mean_max += d.max;
      point.worst_avg = std::max(point.worst_avg, d.avg);
      point.worst_max = std::max(point.worst_max, d.max);
    }
    point.mean_avg /= static_cast<double>(reps);
    point.mean_max /= static_cast<double>(reps);
    curve.points.push_back(std::move(point));
  }
  return curve;
}

MixingCurve::MixingCurve(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) throw ValidationError("mixing curve: no knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!(knots_[i].second >= 0.0 && knots_[i].second <= 1.0)) {
      throw ValidationError(fmt::format("mixing curve: weight {} outside [0,1]", knots_[i].second));
    }
    if (i > 0 && !(knots_[i].first > knots_[i - 1].first)) {
      throw ValidationError("mixing curve: knot times must be strictly increasing");
    }
  }
}

MixingCurve MixingCurve::linear(double lo, double hi) { return MixingCurve({{lo, 1.0}, {hi, 0.0}}); }

double MixingCurve::operator()(double delta_t) const {
  if (delta_t <= knots_.front().first) return knots_.front().second;
  if (delta_t >= knots_.back().first) return knots_.back().second;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), delta_t,
                                   [](double v, const auto& k) { return v < k.first; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (delta_t - x0) / (x1 - x0);
}

ServerlessModel ServerlessModel::linear(LatencyDistribution warm, LatencyDistribution cold,
                                        double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("serverless model: requires lo < hi");
  return ServerlessModel{std::move(warm), std::move(cold), lo, hi, MixingCurve::linear(lo, hi), {}};
}

LatencyDistribution serverless_latency(const ServerlessModel& model, double delta_t) {
  if (!(delta_t >= 0.0)) {
    throw DomainError(fmt::format("serverless latency: delta_t must be >= 0, got {}", delta_t));
  }
  if (delta_t <= model.lo) return model.warm;
  if (delta_t >= model.hi) return model.cold;
  const double w = std::clamp(model.mixing(delta_t), 0.0, 1.0);
  return LatencyDistribution::mixture({model.warm, model.cold}, {w, 1.0 - w});
}

namespace {

// Pool-adjacent-violators fit of a nonincreasing sequence.
std::vector<double> isotonic_nonincreasing(const std::vector<double>& y,
                                           const std::vector<double>& w) {
  struct Block {
    double value;
    double weight;
    std::size_t len;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value < blocks.back().value) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.len += b.len;
    }
  }
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), b.len, b.value);
  return out;
}

}  // namespace

ServerlessModel fit_serverless_regimes(std::span<const TimedLatency> records,
                                       const RegimeConfig& config) {
  if (!(config.lo < config.hi) || !(config.bucket_width > 0.0) || !(config.weight_step > 0.0)) {
    throw ValidationError("regime fit: requires lo < hi and positive bucket width / weight step");
  }
  if (records.size() < config.min_records) {
    throw InsufficientDataError(fmt::format("regime fit: {} records, at least {} required",
                                            records.size(), config.min_records));
  }

  const auto n_buckets = static_cast<std::size_t>(
      std::ceil((config.hi - config.lo) / config.bucket_width - 1e-9));
  std::vector<double> warm;
  std::vector<double> cold;
  std::vector<std::vector<double>> band(n_buckets);
  for (const auto& r : records) {
    if (!std::isfinite(r.delta_t) || !std::isfinite(r.latency)) continue;
    if (r.delta_t <= config.lo) {
      warm.push_back(r.latency);
    } else if (r.delta_t >= config.hi) {
      cold.push_back(r.latency);
    } else {
      auto b = static_cast<std::size_t>((r.delta_t - config.lo) / config.bucket_width);
      band[std::min(b, n_buckets - 1)].push_back(r.latency);
    }
  }
  if (warm.empty()) {
    throw InsufficientDataError(
        fmt::format("regime fit: warm regime (delta_t <= {} s) has no records", config.lo));
  }
  if (cold.empty()) {
    throw InsufficientDataError(
        fmt::format("regime fit: cold regime (delta_t >= {} s) has no records", config.hi));
  }

  ServerlessModel model{LatencyDistribution::empirical(std::move(warm)),
                        LatencyDistribution::empirical(std::move(cold)),
                        config.lo,
                        config.hi,
                        MixingCurve::linear(config.lo, config.hi),
                        {}};

  const auto steps = static_cast<int>(std::lround(1.0 / config.weight_step));
  for (std::size_t b = 0; b < n_buckets; ++b) {
    if (band[b].empty()) continue;
    BucketFit fit;
    fit.start = config.lo + static_cast<double>(b) * config.bucket_width;
    fit.end = std::min(config.hi, fit.start + config.bucket_width);
    fit.count = band[b].size();
    const auto observed = LatencyDistribution::empirical(std::move(band[b]));
    fit.distance = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
      const double w = std::min(1.0, k * config.weight_step);
      const auto candidate = LatencyDistribution::mixture({model.warm, model.cold}, {w, 1.0 - w});
      const double d = cdf_distance(observed, candidate).avg;
      if (d < fit.distance) {
        fit.distance = d;
        fit.warm_weight = w;
      }
    }
    model.buckets.push_back(fit);
  }

  if (!model.buckets.empty()) {
    std::vector<double> y;
    std::vector<double> wts;
    for (const auto& b : model.buckets) {
      y.push_back(b.warm_weight);
      wts.push_back(static_cast<double>(b.count));
    }
    const auto mono = isotonic_nonincreasing(y, wts);
    std::vector<std::pair<double, double>> knots{{config.lo, 1.0}};
    for (std::size_t i = 0; i < model.buckets.size(); ++i) {
      knots.emplace_back(0.5 * (model.buckets[i].start + model.buckets[i].end), mono[i]);
    }
    knots.emplace_back(config.hi, 0.0);
    model.mixing = MixingCurve(std::move(knots));
  }
  return model;
}

}  // namespace fogtap

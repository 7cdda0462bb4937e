#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fogtap/latency_model.hpp"
#include "fogtap/rng.hpp"

namespace fogtap {

/// Right-continuous step CDF with a jump of 1/n at each sorted sample.
class EcdfEstimate {
 public:
  /// Throws ValidationError on empty, non-finite or negative input.
  explicit EcdfEstimate(std::vector<double> samples);

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] const std::vector<double>& samples_sorted() const { return sorted_; }
  [[nodiscard]] std::size_t size() const { return sorted_.size(); }
  [[nodiscard]] LatencyDistribution to_distribution() const;

 private:
  std::vector<double> sorted_;
};

[[nodiscard]] EcdfEstimate estimate_cdf(std::vector<double> samples);

struct CdfDistance {
  double avg = 0.0;
  double max = 0.0;
};

using CdfFunction = std::function<double(double)>;

/// Mean and largest |a(t) - b(t)| over `grid`. Throws DomainError if the grid
/// is empty or unsorted.
[[nodiscard]] CdfDistance cdf_distance(const CdfFunction& a, const CdfFunction& b,
                                       std::span<const double> grid);

/// Jump points of both laws (and the instant just before each jump), merged
/// with `quantile_points` evenly spaced quantiles of each law.
[[nodiscard]] std::vector<double> distance_grid(const LatencyDistribution& a,
                                                const LatencyDistribution& b,
                                                std::size_t quantile_points = 1000);

/// cdf_distance over distance_grid(a, b).
[[nodiscard]] CdfDistance cdf_distance(const LatencyDistribution& a, const LatencyDistribution& b);

struct ErrorCurvePoint {
  std::size_t n = 0;
  std::vector<CdfDistance> reps;
  double mean_avg = 0.0;  // average-distance panel
  double mean_max = 0.0;
  double worst_avg = 0.0;
  double worst_max = 0.0;  // maximum-distance panel
};

struct CdfErrorCurve {
  std::vector<ErrorCurvePoint> points;
};

/// For every N in `n_grid` (strictly increasing), estimates the reference CDF
/// from N draws `reps` times and records the distances to the reference.
/// Repetition r at grid size N uses its own sub-stream of `seed`.
[[nodiscard]] CdfErrorCurve error_curve(const LatencyDistribution& reference,
                                        const std::vector<std::size_t>& n_grid, std::size_t reps,
                                        RngSeed seed);

/// Piecewise-linear weight on the warm law as a function of the time since
/// the previous invocation; clamped outside its knots.
class MixingCurve {
 public:
  MixingCurve() = default;
  explicit MixingCurve(std::vector<std::pair<double, double>> knots);

  static MixingCurve linear(double lo, double hi);

  [[nodiscard]] double operator()(double delta_t) const;
  [[nodiscard]] const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

struct BucketFit {
  double start = 0.0;
  double end = 0.0;
  std::size_t count = 0;
  double warm_weight = 0.0;  // raw grid-search optimum
  double distance = 0.0;     // average CDF distance at the optimum
};

/// Serverless latency as a function of the inter-invocation time: warm below
/// `lo`, cold above `hi`, and a warm/cold mixture in between.
struct ServerlessModel {
  LatencyDistribution warm;
  LatencyDistribution cold;
  double lo = 10.0;
  double hi = 60.0;
  MixingCurve mixing;
  std::vector<BucketFit> buckets;  // empty unless fitted from records

  static ServerlessModel linear(LatencyDistribution warm, LatencyDistribution cold, double lo,
                                double hi);
};

[[nodiscard]] LatencyDistribution serverless_latency(const ServerlessModel& model, double delta_t);

struct TimedLatency {
  double delta_t = 0.0;
  double latency = 0.0;
};

struct RegimeConfig {
  double lo = 10.0;
  double hi = 60.0;
  double bucket_width = 10.0;
  double weight_step = 0.05;
  std::size_t min_records = 30;
};

/// Splits records into warm (delta_t <= lo), cold (delta_t >= hi) and
/// intermediate buckets, and fits a warm weight per bucket by grid search on
/// the average CDF distance. The model's mixing curve is the nonincreasing
/// (isotonic) fit through the bucket weights, pinned to 1 at lo and 0 at hi.
/// Throws InsufficientDataError when a regime has no records.
[[nodiscard]] ServerlessModel fit_serverless_regimes(std::span<const TimedLatency> records,
                                                     const RegimeConfig& config = {});

}  // namespace fogtap

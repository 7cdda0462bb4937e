#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "fogtap/rng.hpp"

namespace fogtap {

/// Parameters of a three-parameter generalized extreme value law with
/// positive shape (Frechet / inverse Weibull type). Times are in seconds.
struct GevParams {
  double shape = 0.1;
  double scale = 1.0;
  double location = 0.0;

  /// Lower end of the support, `location - scale / shape`.
  [[nodiscard]] double lower_bound() const { return location - scale / shape; }

  friend bool operator==(const GevParams&, const GevParams&) = default;
};

class LatencyDistribution;

struct GevLaw {
  GevParams params;
};

struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

struct EmpiricalLaw {
  std::vector<double> sorted;  // ascending, finite, nonnegative
};

struct MixtureLaw {
  std::vector<LatencyDistribution> components;
  std::vector<double> weights;
};

struct DegenerateLaw {
  double value = 0.0;
};

/// Immutable random-variable model of a task completion time.
/// Construct through the named factories; each one validates its invariants
/// and throws ValidationError on violation.
class LatencyDistribution {
 public:
  using Law = std::variant<GevLaw, UniformLaw, EmpiricalLaw, MixtureLaw, DegenerateLaw>;

  static LatencyDistribution gev(GevParams params);
  static LatencyDistribution uniform(double lo, double hi);
  static LatencyDistribution empirical(std::vector<double> samples);
  static LatencyDistribution mixture(std::vector<LatencyDistribution> components,
                                     std::vector<double> weights);
  static LatencyDistribution degenerate(double value);

  [[nodiscard]] const Law& law() const { return law_; }

  /// Infimum of the support (may be negative for some GEV parameters).
  [[nodiscard]] double support_lower() const;

  /// True when the law has no atoms.
  [[nodiscard]] bool is_continuous() const;

  /// Locations of the CDF jumps, sorted and de-duplicated.
  [[nodiscard]] std::vector<double> atoms() const;

  [[nodiscard]] std::string describe() const;

 private:
  explicit LatencyDistribution(Law law) : law_(std::move(law)) {}
  Law law_;
};

[[nodiscard]] double cdf(const LatencyDistribution& dist, double t);

/// Generalized inverse: smallest t with cdf(t) >= p. Throws DomainError unless
/// 0 < p < 1.
[[nodiscard]] double quantile(const LatencyDistribution& dist, double p);

[[nodiscard]] double sample_one(const LatencyDistribution& dist, RngStream& rng);
[[nodiscard]] std::vector<double> sample(const LatencyDistribution& dist, RngStream& rng,
                                         std::size_t n);

/// A bounded function g : seconds -> [0,1] together with the structure the
/// expectation engine can exploit.
struct Transform {
  enum class Shape {
    kGeneral,          // smooth between breakpoints
    kPiecewiseLinear,  // linear between breakpoints, constant outside them
    kStep,             // 1 for t <= breakpoints[0], else 0
  };

  std::function<double(double)> eval;
  std::vector<double> breakpoints;
  Shape shape = Shape::kGeneral;
};

inline constexpr double kQuadratureTolerance = 1e-6;

/// E[g(T)]. Exact for step transforms, for piecewise-linear transforms of
/// uniform laws, and for empirical/degenerate laws; otherwise adaptive
/// Gauss-Kronrod quadrature of g(quantile(u)) over u in (0,1).
/// Throws NumericalError if the quadrature error estimate exceeds
/// kQuadratureTolerance.
[[nodiscard]] double expect_transform(const LatencyDistribution& dist, const Transform& g);

/// Fits the GEV (shape in (0, 2]) whose 10th, 50th and 90th percentiles equal
/// the arguments. Throws FitError when the triple is out of reach.
[[nodiscard]] GevParams gev_from_quantiles(double median, double p10, double p90);

}  // namespace fogtap

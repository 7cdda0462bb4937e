#include "fogtap/latency_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "fogtap/errors.hpp"

namespace fogtap {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gev_cdf(const GevParams& p, double t) {
  const double z = 1.0 + p.shape * (t - p.location) / p.scale;
  if (z <= 0.0) return 0.0;
  return std::exp(-std::pow(z, -1.0 / p.shape));
}

double gev_quantile(const GevParams& p, double u) {
  // location + scale * ((-ln u)^-shape - 1) / shape, written with expm1 so
  // that small shapes keep full precision.
  const double l = std::log(-std::log(u));
  return p.location + p.scale * std::expm1(-p.shape * l) / p.shape;
}

double empirical_cdf(const std::vector<double>& sorted, double t) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

double empirical_quantile(const std::vector<double>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double mixture_quantile(const LatencyDistribution& dist, const MixtureLaw& m, double p) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : m.components) {
    const double q = quantile(c, p);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  if (cdf(dist, lo) >= p) return lo;
  // Invariant: cdf(lo) < p <= cdf(hi).
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(dist, mid) >= p) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Exact E[g(T)] for T ~ U(lo, hi) when g is linear between breakpoints.
double uniform_piecewise_linear(const UniformLaw& u, const Transform& g) {
  std::vector<double> cuts{u.lo};
  for (double b : g.breakpoints) {
    if (b > u.lo && b < u.hi) cuts.push_back(b);
  }
  cuts.push_back(u.hi);
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (b <= a) continue;
    // Evaluate strictly inside the piece so jumps at the ends do not leak in.
    const double w = b - a;
    const double ga = g.eval(a + 1e-12 * w);
    const double gb = g.eval(b - 1e-12 * w);
    area += 0.5 * (ga + gb) * w;
  }
  return area / (u.hi - u.lo);
}

double quantile_space_quadrature(const LatencyDistribution& dist, const Transform& g) {
  // Integrate g(quantile(u)) du over (0,1) after substituting u = exp(-exp(-y)),
  // which removes the endpoint singularities of heavy-tailed quantile functions.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cuts{-kInf, kInf};
  for (double b : g.breakpoints) {
    const double u = cdf(dist, b);
    if (u > 0.0 && u < 1.0) cuts.push_back(-std::log(-std::log(u)));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto integrand = [&](double y) {
    const double e = std::exp(-y);
    if (!std::isfinite(e)) return 0.0;
    const double weight = std::exp(-y - e);
    if (weight == 0.0) return 0.0;
    const double u = std::clamp(std::exp(-e), std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53);
    return g.eval(quantile(dist, u)) * weight;
  };

  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    double l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, cuts[i], cuts[i + 1], 20, 1e-12, &err, &l1);
    total_error += err;
  }
  if (!(total_error <= kQuadratureTolerance) || !std::isfinite(total)) {
    throw NumericalError(fmt::format(
        "quadrature did not converge for {}: estimate {:.9g}, error bound {:.3g} over {} pieces",
        dist.describe(), total, total_error, cuts.size() - 1));
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace

LatencyDistribution LatencyDistribution::gev(GevParams params) {
  if (!(params.shape > 0.0) || !std::isfinite(params.shape)) {
    throw ValidationError(fmt::format("gev: shape must be > 0, got {}", params.shape));
  }
  if (!(params.scale > 0.0) || !std::isfinite(params.scale)) {
    throw ValidationError(fmt::format("gev: scale must be > 0, got {}", params.scale));
  }
  if (!std::isfinite(params.location)) {
    throw ValidationError("gev: location must be finite");
  }
  return LatencyDistribution(GevLaw{params});
}

LatencyDistribution LatencyDistribution::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ValidationError(fmt::format("uniform: requires finite lo < hi, got [{}, {}]", lo, hi));
  }
  return LatencyDistribution(UniformLaw{lo, hi});
}

LatencyDistribution LatencyDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ValidationError("empirical: at least one sample is required");
  for (double s : samples) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ValidationError(fmt::format("empirical: samples must be finite and >= 0, got {}", s));
    }
  }
  std::sort(samples.begin(), samples.end());
  return LatencyDistribution(EmpiricalLaw{std::move(samples)});
}

LatencyDistribution LatencyDistribution::mixture(std::vector<LatencyDistribution> components,
                                                 std::vector<double> weights) {
  if (components.empty()) throw ValidationError("mixture: no components");
  if (components.size() != weights.size()) {
    throw ValidationError(fmt::format("mixture: {} components but {} weights", components.size(),
                                      weights.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError(fmt::format("mixture: weights must be nonnegative, got {}", w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError(fmt::format("mixture: weights sum to {:.12g}, expected 1", sum));
  }
  return LatencyDistribution(MixtureLaw{std::move(components), std::move(weights)});
}

LatencyDistribution LatencyDistribution::degenerate(double value) {
  if (!std::isfinite(value)) throw ValidationError("degenerate: value must be finite");
  return LatencyDistribution(DegenerateLaw{value});
}

double LatencyDistribution::support_lower() const {
  return std::visit(
      Overloaded{
          [](const GevLaw& g) { return g.params.lower_bound(); },
          [](const UniformLaw& u) { return u.lo; },
          [](const EmpiricalLaw& e) { return e.sorted.front(); },
          [](const MixtureLaw& m) {
            double lo = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m.components.size(); ++i) {
              if (m.weights[i] > 0.0) lo = std::min(lo, m.components[i].support_lower());
            }
            return lo;
          },
          [](const DegenerateLaw& d) { return d.value; },
      },
      law_);
}

bool LatencyDistribution::is_continuous() const {
  return std::visit(Overloaded{
                        [](const GevLaw&) { return true; },
                        [](const UniformLaw&) { return true; },
                        [](const EmpiricalLaw&) { return false; },
                        [](const MixtureLaw& m) {
                          for (std::size_t i = 0; i < m.components.size(); ++i) {
                            if (m.weights[i] > 0.0 && !m.components[i].is_continuous()) {
                              return false;
                            }
                          }
                          return true;
                        },
                        [](const DegenerateLaw&) { return false; },
                    },
                    law_);
}

std::vector<double> LatencyDistribution::atoms() const {
  std::vector<double> out;
  std::visit(Overloaded{
                 [](const GevLaw&) {},
                 [](const UniformLaw&) {},
                 [&](const EmpiricalLaw& e) { out = e.sorted; },
                 [&](const MixtureLaw& m) {
                   for (std::size_t i = 0; i < m.components.size(); ++i) {
                     if (m.weights[i] <= 0.0) continue;
                     const auto a = m.components[i].atoms();
                     out.insert(out.end(), a.begin(), a.end());
                   }
                   std::sort(out.begin(), out.end());
                 },
                 [&](const DegenerateLaw& d) { out.push_back(d.value); },
             },
             law_);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string LatencyDistribution::describe() const {
  return std::visit(
      Overloaded{
          [](const GevLaw& g) {
            return fmt::format("Gev(shape={:g}, scale={:g}, loc={:g})", g.params.shape,
                               g.params.scale, g.params.location);
          },
          [](const UniformLaw& u) { return fmt::format("Uniform({:g}, {:g})", u.lo, u.hi); },
          [](const EmpiricalLaw& e) { return fmt::format("Empirical(n={})", e.sorted.size()); },
          [](const MixtureLaw& m) {
            std::string s = "Mixture(";
            for (std::size_t i = 0; i < m.components.size(); ++i) {
              if (i) s += ", ";
              s += fmt::format("{:g}*{}", m.weights[i], m.components[i].describe());
            }
            return s + ")";
          },
          [](const DegenerateLaw& d) { return fmt::format("Degenerate({:g})", d.value); },
      },
      law_);
}

double cdf(const LatencyDistribution& dist, double t) {
  if (std::isnan(t)) return 0.0;
  return std::visit(Overloaded{
                        [&](const GevLaw& g) { return gev_cdf(g.params, t); },
                        [&](const UniformLaw& u) {
                          if (t <= u.lo) return 0.0;
                          if (t >= u.hi) return 1.0;
                          return (t - u.lo) / (u.hi - u.lo);
                        },
                        [&](const EmpiricalLaw& e) { return empirical_cdf(e.sorted, t); },
                        [&](const MixtureLaw& m) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < m.components.size(); ++i) {
                            acc += m.weights[i] * cdf(m.components[i], t);
                          }
                          return std::min(acc, 1.0);
                        },
                        [&](const DegenerateLaw& d) { return t >= d.value ? 1.0 : 0.0; },
                    },
                    dist.law());
}

double quantile(const LatencyDistribution& dist, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(fmt::format("quantile: p must lie in (0,1), got {}", p));
  }
  return std::visit(Overloaded{
                        [&](const GevLaw& g) { return gev_quantile(g.params, p); },
                        [&](const UniformLaw& u) { return u.lo + p * (u.hi - u.lo); },
                        [&](const EmpiricalLaw& e) { return empirical_quantile(e.sorted, p); },
                        [&](const MixtureLaw& m) { return mixture_quantile(dist, m, p); },
                        [&](const DegenerateLaw& d) { return d.value; },
                    },
                    dist.law());
}

double sample_one(const LatencyDistribution& dist, RngStream& rng) {
  if (const auto* m = std::get_if<MixtureLaw>(&dist.law())) {
    // Component selection followed by inverse transform within the component.
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = m->components.size() - 1;
    for (std::size_t i = 0; i < m->components.size(); ++i) {
      acc += m->weights[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    while (m->weights[pick] <= 0.0 && pick > 0) --pick;
    return sample_one(m->components[pick], rng);
  }
  return quantile(dist, rng.uniform());
}

std::vector<double> sample(const LatencyDistribution& dist, RngStream& rng, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(dist, rng));
  return out;
}

double expect_transform(const LatencyDistribution& dist, const Transform& g) {
  if (g.shape == Transform::Shape::kStep) {
    return cdf(dist, g.breakpoints.at(0));
  }
  return std::visit(
      Overloaded{
          [&](const GevLaw&) { return quantile_space_quadrature(dist, g); },
          [&](const UniformLaw& u) {
            if (g.shape == Transform::Shape::kPiecewiseLinear) {
              return uniform_piecewise_linear(u, g);
            }
            return quantile_space_quadrature(dist, g);
          },
          [&](const EmpiricalLaw& e) {
            double acc = 0.0;
            for (double s : e.sorted) acc += g.eval(s);
            return acc / static_cast<double>(e.sorted.size());
          },
          [&](const MixtureLaw& m) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m.components.size(); ++i) {
              if (m.weights[i] > 0.0) acc += m.weights[i] * expect_transform(m.components[i], g);
            }
            return acc;
          },
          [&](const DegenerateLaw& d) { return g.eval(d.value); },
      },
      dist.law());
}

namespace {

// Standardized GEV quantile ((-ln p)^-xi - 1) / xi, continuous at xi = 0.
double standard_gev_quantile(double p, double xi) {
  const double l = std::log(-std::log(p));
  if (xi == 0.0) return -l;
  return std::expm1(-xi * l) / xi;
}

double skew_ratio(double xi) {
  const double q10 = standard_gev_quantile(0.1, xi);
  const double q50 = standard_gev_quantile(0.5, xi);
  const double q90 = standard_gev_quantile(0.9, xi);
  return (q90 - q50) / (q50 - q10);
}

constexpr double kMaxShape = 2.0;

}  // namespace

GevParams gev_from_quantiles(double median, double p10, double p90) {
  if (!(p10 > 0.0)) throw FitError(fmt::format("gev fit: p10 must be positive, got {}", p10));
  if (!(p10 < median)) {
    throw FitError(fmt::format("gev fit: requires p10 < median, got p10={} median={}", p10, median));
  }
  if (!(median < p90)) {
    throw FitError(fmt::format("gev fit: requires median < p90, got median={} p90={}", median, p90));
  }

  const double target = (p90 - median) / (median - p10);
  const double r_min = skew_ratio(0.0);
  const double r_max = skew_ratio(kMaxShape);
  if (!(target > r_min)) {
    throw FitError(fmt::format(
        "gev fit: upper/lower spread ratio {:.6g} is at or below the shape->0 limit {:.6g}; "
        "no positive shape reproduces it",
        target, r_min));
  }
  if (target > r_max) {
    throw FitError(fmt::format(
        "gev fit: upper/lower spread ratio {:.6g} exceeds the shape={} limit {:.6g}", target,
        kMaxShape, r_max));
  }

  // skew_ratio is increasing in the shape.
  double lo = 0.0;
  double hi = kMaxShape;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (skew_ratio(mid) < target ? lo : hi) = mid;
  }
  const double xi = 0.5 * (lo + hi);
  if (!(xi > 0.0)) throw FitError("gev fit: shape collapsed to zero");

  const double q10 = standard_gev_quantile(0.1, xi);
  const double q50 = standard_gev_quantile(0.5, xi);
  const double q90 = standard_gev_quantile(0.9, xi);
  GevParams out;
  out.shape = xi;
  out.scale = (p90 - p10) / (q90 - q10);
  out.location = median - out.scale * q50;

  const GevParams& fitted = out;
  const auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
  const double worst = std::max({rel(gev_quantile(fitted, 0.1), p10),
                                 rel(gev_quantile(fitted, 0.5), median),
                                 rel(gev_quantile(fitted, 0.9), p90)});
  if (worst > 1e-6) {
    throw FitError(fmt::format("gev fit: quantile mismatch {:.3g} after root finding", worst));
  }
  return out;
}

}  // namespace fogtap

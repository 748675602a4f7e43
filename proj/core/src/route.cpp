#include "dyngam/route.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dyngam/errors.hpp"

namespace dyngam {

RoutePredictive::RoutePredictive(double alpha_star_in, double c_in, double a_tilde_in,
                                 double b_tilde_in)
    : alpha_star(alpha_star_in), c(c_in), a_tilde(a_tilde_in), b_tilde(b_tilde_in) {
  for (double v : {alpha_star, c, a_tilde, b_tilde}) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw DomainError("RoutePredictive: all fields must be positive");
    }
  }
}

std::pair<double, double> moment_match(const HyperParams& hyper, const CorridorModel& model) {
  double s1 = 0.0;  // sum of 1/lambda
  double s2 = 0.0;  // sum of 1/lambda^2
  for (double l : model.lambdas()) {
    const double inv = 1.0 / l;
    s1 += inv;
    s2 += inv * inv;
  }
  return {hyper.alpha * s1 * s1 / s2, s1 / s2};
}

RoutePredictive route_predictive(const HyperParams& hyper, const CorridorModel& model,
                                 const GammaState& evolved_prior) {
  const auto [alpha_star, c] = moment_match(hyper, model);
  return RoutePredictive(alpha_star, c, evolved_prior.a, evolved_prior.b);
}

double route_cdf(const RoutePredictive& rp, double tau) {
  if (!std::isfinite(tau) || tau <= 0.0) {
    throw DomainError("route_cdf: tau must be positive, got " + std::to_string(tau));
  }
  const FLaw law(2.0 * rp.alpha_star, 2.0 * rp.a_tilde);
  return f_cdf(law, rp.a_tilde * rp.c * tau / (rp.alpha_star * rp.b_tilde));
}

double route_quantile(const RoutePredictive& rp, double q) {
  const FLaw law(2.0 * rp.alpha_star, 2.0 * rp.a_tilde);
  return rp.alpha_star * rp.b_tilde / (rp.c * rp.a_tilde) * f_quantile(law, q);
}

double on_time_probability(const RoutePredictive& rp, double tau) {
  return route_cdf(rp, tau);
}

double planning_time_index(const RoutePredictive& rp, double s_freeflow) {
  if (!std::isfinite(s_freeflow) || s_freeflow <= 0.0) {
    throw DomainError("planning_time_index: free-flow travel time must be positive");
  }
  return route_quantile(rp, 0.95) / s_freeflow;
}

double buffer_index(const RoutePredictive& rp) {
  const double q50 = route_quantile(rp, 0.50);
  const double q95 = route_quantile(rp, 0.95);
  return (q95 - q50) / q50;
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("empirical_quantile: empty sample");
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw DomainError("empirical_quantile: p must lie in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double free_flow_travel_time(const ObservationSeries& series) {
  if (series.size() < 20) {
    throw DataError("free_flow_travel_time: need at least 20 observations, got " +
                    std::to_string(series.size()));
  }
  std::vector<double> sums;
  sums.reserve(series.size());
  for (const auto& obs : series) {
    double s = 0.0;
    for (double v : obs.y) s += v;
    sums.push_back(s);
  }
  return empirical_quantile(std::move(sums), 0.05);
}

}  // namespace dyngam

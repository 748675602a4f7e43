#pragma once

#include <utility>
#include <vector>

#include "dyngam/corridor.hpp"

namespace dyngam {

/// Everything needed to evaluate the closed-form route travel time law:
/// conditional on the environment, the route sum is approximated by
/// Gamma(alpha_star, c * eta); integrating eta out gives an F distribution.
struct RoutePredictive {
  double alpha_star;
  double c;
  double a_tilde;
  double b_tilde;

  RoutePredictive(double alpha_star_in, double c_in, double a_tilde_in, double b_tilde_in);
};

/// Matched shape and rate multiplier for the conditional route sum:
/// alpha_star = alpha * (sum 1/lambda)^2 / (sum 1/lambda^2),
/// c = (sum 1/lambda) / (sum 1/lambda^2).
/// Exact when all segment rates are equal (then alpha_star = m * alpha).
std::pair<double, double> moment_match(const HyperParams& hyper, const CorridorModel& model);

/// Assemble the route law from an already-evolved prior (a_tilde, b_tilde).
RoutePredictive route_predictive(const HyperParams& hyper, const CorridorModel& model,
                                 const GammaState& evolved_prior);

/// P(S <= tau): F CDF of 2*alpha_star, 2*a_tilde at a_tilde*c*tau/(alpha_star*b_tilde).
double route_cdf(const RoutePredictive& rp, double tau);

/// Inverse of route_cdf.
double route_quantile(const RoutePredictive& rp, double q);

/// Same quantity as route_cdf, kept as a named metric.
double on_time_probability(const RoutePredictive& rp, double tau);

/// 95th percentile over free-flow travel time.
double planning_time_index(const RoutePredictive& rp, double s_freeflow);

/// (q95 - q50) / q50, nonnegative.
double buffer_index(const RoutePredictive& rp);

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" rule); the convention every coverage number depends on.
double empirical_quantile(std::vector<double> values, double p);

/// Empirical 5th percentile of route sums sum_j y_jt; needs >= 20 observations.
double free_flow_travel_time(const ObservationSeries& series);

}  // namespace dyngam

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dyngam/distributions.hpp"

namespace dyngam {

/// Gamma posterior of the latent environment: eta | data ~ Gamma(a, b).
/// Discounting one step ahead turns (a, b) into the prior (gamma*a, gamma*b).
struct GammaState {
  double a;
  double b;

  GammaState(double a_in, double b_in);

  double mean() const { return a / b; }
  double variance() const { return a / (b * b); }
};

/// Fixed hyperparameters of the observation and evolution model.
/// alpha: per-observation Gamma shape. gamma_discount: per-step discount in (0,1).
/// beta: covariate coefficients; empty means no covariate scaling.
struct HyperParams {
  double alpha;
  double gamma_discount;
  std::vector<double> beta;

  HyperParams(double alpha_in, double gamma_in, std::vector<double> beta_in = {});
};

/// One time-indexed observation: y holds per-segment travel times in minutes
/// (length 1 in the univariate filter), u the covariate vector (may be empty).
struct ObservationRecord {
  long t = 0;
  std::vector<double> y;
  std::vector<double> u;
};

using ObservationSeries = std::vector<ObservationRecord>;

/// Predictive mean/variance; unset when the corresponding shape threshold
/// (a_tilde > 1 for the mean, > 2 for the variance) is not met.
struct PredictiveMoments {
  std::optional<double> mean;
  std::optional<double> variance;
};

struct FilterStep {
  GammaState prior;      // evolved state (a_tilde, b_tilde) before seeing y_t
  GammaState posterior;  // state after absorbing y_t
  double log_predictive; // one-step-ahead log density at the realized y_t
};

/// exp(beta . u), computed in log space; |beta . u| above 50 raises DataError.
/// Returns 1 when beta is empty.
double covariate_scale(const HyperParams& hyper, const std::vector<double>& u);

/// Discount step: (a, b) -> (gamma*a, gamma*b). Mean preserved, variance
/// inflated by exactly 1/gamma.
GammaState evolve_state(const GammaState& state, const HyperParams& hyper);

/// Conjugate update from an already-evolved prior:
/// a <- a_tilde + alpha, b <- b_tilde + y * exp(beta . u).
GammaState update_state(const GammaState& prior, const HyperParams& hyper,
                        const ObservationRecord& obs);

/// Log density of the compound-Gamma (Beta prime) one-step predictive.
double predictive_logpdf(const GammaState& prior, const HyperParams& hyper, double y,
                         const std::vector<double>& u = {});

/// Predictive CDF/quantile through the F(2*alpha, 2*a_tilde) representation.
double predictive_cdf(const GammaState& prior, const HyperParams& hyper, double y,
                      const std::vector<double>& u = {});
double predictive_quantile(const GammaState& prior, const HyperParams& hyper, double q,
                           const std::vector<double>& u = {});

PredictiveMoments predictive_moments(const GammaState& prior, const HyperParams& hyper,
                                     const std::vector<double>& u = {});

/// Default initial state: a0 = 2.5 and b0 chosen so the prior mean of eta
/// matches the environment implied by the first observation.
GammaState default_init_state(const ObservationSeries& series, const HyperParams& hyper);

/// Sequential filter pass; posterior at t feeds the evolution at t+1.
std::vector<FilterStep> run_filter(const ObservationSeries& series,
                                   const HyperParams& hyper, const GammaState& init);

}  // namespace dyngam

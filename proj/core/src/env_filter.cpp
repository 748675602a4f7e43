#include "dyngam/env_filter.hpp"

#include <cmath>
#include <string>

#include "dyngam/errors.hpp"
#include "dyngam/special_functions.hpp"

namespace dyngam {

namespace {

void check_scalar_obs(const ObservationRecord& obs) {
  if (obs.y.size() != 1) {
    throw ShapeError("univariate filter expects a single travel time per record, got " +
                     std::to_string(obs.y.size()) + " at t=" + std::to_string(obs.t));
  }
  if (!std::isfinite(obs.y[0]) || obs.y[0] <= 0.0) {
    throw DataError("nonpositive travel time at t=" + std::to_string(obs.t));
  }
}

}  // namespace

GammaState::GammaState(double a_in, double b_in) : a(a_in), b(b_in) {
  if (!std::isfinite(a) || a <= 0.0 || !std::isfinite(b) || b <= 0.0) {
    throw DomainError("GammaState requires positive (a, b), got a=" + std::to_string(a) +
                      ", b=" + std::to_string(b));
  }
}

HyperParams::HyperParams(double alpha_in, double gamma_in, std::vector<double> beta_in)
    : alpha(alpha_in), gamma_discount(gamma_in), beta(std::move(beta_in)) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw DomainError("HyperParams: alpha must be positive, got " + std::to_string(alpha));
  }
  if (!std::isfinite(gamma_discount) || gamma_discount <= 0.0 || gamma_discount >= 1.0) {
    throw DomainError("HyperParams: discount must lie in (0, 1), got " +
                      std::to_string(gamma_discount));
  }
}

double covariate_scale(const HyperParams& hyper, const std::vector<double>& u) {
  if (hyper.beta.empty()) return 1.0;
  if (u.size() != hyper.beta.size()) {
    throw ShapeError("covariate vector length " + std::to_string(u.size()) +
                     " does not match beta length " + std::to_string(hyper.beta.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += hyper.beta[i] * u[i];
  if (!std::isfinite(dot) || std::fabs(dot) > 50.0) {
    throw DataError("covariate effect beta.u = " + std::to_string(dot) +
                    " outside the supported range |beta.u| <= 50");
  }
  return std::exp(dot);
}

GammaState evolve_state(const GammaState& state, const HyperParams& hyper) {
  return GammaState(hyper.gamma_discount * state.a, hyper.gamma_discount * state.b);
}

GammaState update_state(const GammaState& prior, const HyperParams& hyper,
                        const ObservationRecord& obs) {
  check_scalar_obs(obs);
  const double scale = covariate_scale(hyper, obs.u);
  return GammaState(prior.a + hyper.alpha, prior.b + obs.y[0] * scale);
}

double predictive_logpdf(const GammaState& prior, const HyperParams& hyper, double y,
                         const std::vector<double>& u) {
  if (!std::isfinite(y) || y <= 0.0) {
    throw DomainError("predictive_logpdf: y must be positive, got " + std::to_string(y));
  }
  const double s = covariate_scale(hyper, u);
  const double a_t = prior.a;   // a_tilde
  const double b_t = prior.b;   // b_tilde
  const double al = hyper.alpha;
  return log_gamma_fn(al + a_t) - log_gamma_fn(al) - log_gamma_fn(a_t) +
         al * std::log(s) + (al - 1.0) * std::log(y) + a_t * std::log(b_t) -
         (al + a_t) * std::log(b_t + y * s);
}

double predictive_cdf(const GammaState& prior, const HyperParams& hyper, double y,
                      const std::vector<double>& u) {
  if (!std::isfinite(y) || y < 0.0) {
    throw DomainError("predictive_cdf: y must be nonnegative, got " + std::to_string(y));
  }
  if (y == 0.0) return 0.0;
  const double s = covariate_scale(hyper, u);
  const FLaw law(2.0 * hyper.alpha, 2.0 * prior.a);
  return f_cdf(law, prior.a * y * s / (hyper.alpha * prior.b));
}

double predictive_quantile(const GammaState& prior, const HyperParams& hyper, double q,
                           const std::vector<double>& u) {
  const double s = covariate_scale(hyper, u);
  const FLaw law(2.0 * hyper.alpha, 2.0 * prior.a);
  return hyper.alpha * prior.b / (prior.a * s) * f_quantile(law, q);
}

PredictiveMoments predictive_moments(const GammaState& prior, const HyperParams& hyper,
                                     const std::vector<double>& u) {
  const double s = covariate_scale(hyper, u);
  const double a_t = prior.a;
  const double b_t = prior.b;
  const double al = hyper.alpha;
  PredictiveMoments m;
  if (a_t > 1.0) m.mean = al * b_t / (a_t - 1.0) / s;
  if (a_t > 2.0) {
    m.variance = al * b_t * b_t * (al + a_t - 1.0) /
                 ((a_t - 1.0) * (a_t - 1.0) * (a_t - 2.0)) / (s * s);
  }
  return m;
}

GammaState default_init_state(const ObservationSeries& series, const HyperParams& hyper) {
  if (series.empty()) throw DataError("default_init_state: empty series");
  check_scalar_obs(series.front());
  const double scale = covariate_scale(hyper, series.front().u);
  const double eta0 = hyper.alpha / (series.front().y[0] * scale);
  const double a0 = 2.5;  // > 2 keeps the initial predictive variance finite
  return GammaState(a0, a0 / eta0);
}

std::vector<FilterStep> run_filter(const ObservationSeries& series,
                                   const HyperParams& hyper, const GammaState& init) {
  if (series.empty()) throw DataError("run_filter: empty series");
  std::vector<FilterStep> out;
  out.reserve(series.size());
  GammaState state = init;
  for (const auto& obs : series) {
    check_scalar_obs(obs);
    const GammaState prior = evolve_state(state, hyper);
    const double lp = predictive_logpdf(prior, hyper, obs.y[0], obs.u);
    state = update_state(prior, hyper, obs);
    out.push_back(FilterStep{prior, state, lp});
  }
  return out;
}

}  // namespace dyngam

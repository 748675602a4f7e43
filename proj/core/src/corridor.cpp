#include "dyngam/corridor.hpp"

#include <cmath>
#include <string>

#include "dyngam/errors.hpp"
#include "dyngam/special_functions.hpp"

namespace dyngam {

namespace {

void check_obs(const ObservationRecord& obs, const CorridorModel& model) {
  if (obs.y.size() != model.size()) {
    throw ShapeError("observation at t=" + std::to_string(obs.t) + " has " +
                     std::to_string(obs.y.size()) + " segments, corridor has " +
                     std::to_string(model.size()));
  }
  for (std::size_t j = 0; j < obs.y.size(); ++j) {
    if (!std::isfinite(obs.y[j]) || obs.y[j] <= 0.0) {
      throw DataError("nonpositive travel time for segment " + model.segment_ids()[j] +
                      " at t=" + std::to_string(obs.t));
    }
  }
}

double weighted_sum(const CorridorModel& model, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) s += model.lambdas()[j] * y[j];
  return s;
}

}  // namespace

CorridorModel::CorridorModel(std::vector<double> lambdas, std::vector<double> distances,
                             std::vector<std::string> segment_ids)
    : lambdas_(std::move(lambdas)),
      distances_(std::move(distances)),
      segment_ids_(std::move(segment_ids)) {
  if (lambdas_.empty()) throw ShapeError("CorridorModel: need at least one segment");
  double sum = 0.0;
  for (double l : lambdas_) {
    if (!std::isfinite(l) || l <= 0.0) {
      throw DomainError("CorridorModel: segment rates must be positive");
    }
    sum += l;
  }
  const double mean = sum / static_cast<double>(lambdas_.size());
  for (double& l : lambdas_) l /= mean;  // unit-mean gauge

  if (!distances_.empty()) {
    if (distances_.size() != lambdas_.size()) {
      throw ShapeError("CorridorModel: distances length mismatch");
    }
    for (double d : distances_) {
      if (!std::isfinite(d) || d <= 0.0) {
        throw DomainError("CorridorModel: distances must be positive");
      }
    }
  }
  if (segment_ids_.empty()) {
    segment_ids_.reserve(lambdas_.size());
    for (std::size_t j = 0; j < lambdas_.size(); ++j) {
      segment_ids_.push_back("seg" + std::to_string(j + 1));
    }
  } else if (segment_ids_.size() != lambdas_.size()) {
    throw ShapeError("CorridorModel: segment_ids length mismatch");
  }
}

GammaState update_state_mv(const GammaState& prior, const HyperParams& hyper,
                           const CorridorModel& model, const ObservationRecord& obs) {
  check_obs(obs, model);
  const double scale = covariate_scale(hyper, obs.u);
  const double m = static_cast<double>(model.size());
  return GammaState(prior.a + m * hyper.alpha,
                    prior.b + scale * weighted_sum(model, obs.y));
}

double joint_predictive_logpdf(const GammaState& prior, const HyperParams& hyper,
                               const CorridorModel& model, const std::vector<double>& y,
                               const std::vector<double>& u) {
  if (y.size() != model.size()) {
    throw ShapeError("joint_predictive_logpdf: y has " + std::to_string(y.size()) +
                     " segments, corridor has " + std::to_string(model.size()));
  }
  const double scale = covariate_scale(hyper, u);
  const double al = hyper.alpha;
  const double m = static_cast<double>(model.size());
  const double a_t = prior.a;
  const double b_t = prior.b;
  double sum_log_lambda = 0.0;
  double sum_log_y = 0.0;
  double wsum = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (!std::isfinite(y[j]) || y[j] <= 0.0) {
      throw DataError("joint_predictive_logpdf: nonpositive travel time for segment " +
                      model.segment_ids()[j]);
    }
    sum_log_lambda += std::log(model.lambdas()[j]);
    sum_log_y += std::log(y[j]);
    wsum += model.lambdas()[j] * y[j];
  }
  return log_gamma_fn(m * al + a_t) - m * log_gamma_fn(al) - log_gamma_fn(a_t) +
         al * sum_log_lambda + m * al * std::log(scale) + (al - 1.0) * sum_log_y +
         a_t * std::log(b_t) - (m * al + a_t) * std::log(b_t + scale * wsum);
}

std::optional<double> predictive_correlation(const GammaState& prior,
                                             const HyperParams& hyper) {
  if (prior.a <= 2.0) return std::nullopt;
  return hyper.alpha / (hyper.alpha + prior.a - 1.0);
}

std::vector<FilterStep> run_filter_mv(const ObservationSeries& series,
                                      const HyperParams& hyper,
                                      const CorridorModel& model,
                                      const GammaState& init) {
  if (series.empty()) throw DataError("run_filter_mv: empty series");
  std::vector<FilterStep> out;
  out.reserve(series.size());
  GammaState state = init;
  for (const auto& obs : series) {
    const GammaState prior = evolve_state(state, hyper);
    const double lp = joint_predictive_logpdf(prior, hyper, model, obs.y, obs.u);
    state = update_state_mv(prior, hyper, model, obs);
    out.push_back(FilterStep{prior, state, lp});
  }
  return out;
}

CorridorModel calibrate_lambdas(const ObservationSeries& series) {
  if (series.size() < 2) {
    throw DataError("calibrate_lambdas: need at least 2 complete observations, got " +
                    std::to_string(series.size()));
  }
  const std::size_t m = series.front().y.size();
  if (m == 0) throw ShapeError("calibrate_lambdas: empty observation vectors");
  std::vector<double> means(m, 0.0);
  for (const auto& obs : series) {
    if (obs.y.size() != m) {
      throw ShapeError("calibrate_lambdas: ragged observation at t=" +
                       std::to_string(obs.t));
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(obs.y[j]) || obs.y[j] <= 0.0) {
        throw DataError("calibrate_lambdas: nonpositive travel time at t=" +
                        std::to_string(obs.t));
      }
      means[j] += obs.y[j];
    }
  }
  std::vector<double> lambdas(m);
  for (std::size_t j = 0; j < m; ++j) {
    lambdas[j] = static_cast<double>(series.size()) / means[j];  // 1 / mean
  }
  return CorridorModel(std::move(lambdas));
}

GammaState default_init_state_mv(const ObservationSeries& series, const HyperParams& hyper,
                                 const CorridorModel& model) {
  if (series.empty()) throw DataError("default_init_state_mv: empty series");
  check_obs(series.front(), model);
  const double scale = covariate_scale(hyper, series.front().u);
  const double m = static_cast<double>(model.size());
  const double eta0 = m * hyper.alpha / (scale * weighted_sum(model, series.front().y));
  const double a0 = 2.5;
  return GammaState(a0, a0 / eta0);
}

}  // namespace dyngam

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyngam/env_filter.hpp"

namespace dyngam {

/// Ordered segment rates and geometry for one corridor. The rates are
/// normalized to unit mean at construction, which fixes the scale split
/// between lambda and the environment once for every consumer.
class CorridorModel {
 public:
  /// distances may be empty when geometry is unknown (e.g. rates calibrated
  /// from observations alone); otherwise it must match lambdas in length with
  /// positive entries. Empty segment_ids are auto-numbered "seg1".."segm".
  CorridorModel(std::vector<double> lambdas, std::vector<double> distances = {},
                std::vector<std::string> segment_ids = {});

  std::size_t size() const { return lambdas_.size(); }
  const std::vector<double>& lambdas() const { return lambdas_; }
  const std::vector<double>& distances() const { return distances_; }
  const std::vector<std::string>& segment_ids() const { return segment_ids_; }

 private:
  std::vector<double> lambdas_;
  std::vector<double> distances_;
  std::vector<std::string> segment_ids_;
};

/// Joint conjugate update from all m segments:
/// a <- a_tilde + m*alpha, b <- b_tilde + exp(beta.u) * sum_j lambda_j y_jt.
GammaState update_state_mv(const GammaState& prior, const HyperParams& hyper,
                           const CorridorModel& model, const ObservationRecord& obs);

/// Log density of the multivariate compound-Gamma joint predictive.
double joint_predictive_logpdf(const GammaState& prior, const HyperParams& hyper,
                               const CorridorModel& model, const std::vector<double>& y,
                               const std::vector<double>& u = {});

/// Common predictive correlation alpha / (alpha + a_tilde - 1), identical for
/// every segment pair. Unset when a_tilde <= 2 (second moments undefined).
std::optional<double> predictive_correlation(const GammaState& prior,
                                             const HyperParams& hyper);

/// m-dimensional analog of run_filter; log_predictive is the joint density.
std::vector<FilterStep> run_filter_mv(const ObservationSeries& series,
                                      const HyperParams& hyper,
                                      const CorridorModel& model,
                                      const GammaState& init);

/// Segment rates proportional to inverse sample means, unit-mean normalized.
CorridorModel calibrate_lambdas(const ObservationSeries& series);

/// Multivariate variant of the default prior: a0 = 2.5, prior mean of eta set
/// from the first observation's weighted segment sum.
GammaState default_init_state_mv(const ObservationSeries& series, const HyperParams& hyper,
                                 const CorridorModel& model);

}  // namespace dyngam

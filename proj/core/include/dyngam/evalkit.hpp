#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dyngam/corridor.hpp"
#include "dyngam/route.hpp"

namespace dyngam {

/// Streaming one-step-ahead predictive interface. Queries at time t may only
/// use data absorbed so far (t-1 and earlier); absorb() then advances the
/// state with the realized observation. The walk order makes information
/// leakage from future observations structurally impossible.
class OneStepEvaluator {
 public:
  virtual ~OneStepEvaluator() = default;

  /// The scalar being predicted (route travel time in both built-in modes).
  virtual double observable(const ObservationRecord& obs) const = 0;

  virtual double predictive_cdf_at(double value) const = 0;
  virtual std::pair<double, double> central_interval(double level) const = 0;

  /// Log predictive density contribution of obs (joint across segments in
  /// multivariate mode, route-level in univariate mode).
  virtual double log_predictive(const ObservationRecord& obs) const = 0;

  virtual void absorb(const ObservationRecord& obs) = 0;
};

/// Corridor filter on segment data; route queries through the matched F law.
std::unique_ptr<OneStepEvaluator> make_multivariate_route_evaluator(
    const HyperParams& hyper, const CorridorModel& model, const GammaState& init);

/// Univariate filter applied directly to route sums.
std::unique_ptr<OneStepEvaluator> make_univariate_route_evaluator(
    const HyperParams& hyper, const GammaState& init);

/// PIT values u_t = P(Y_t <= y_t | data through t-1) for t past the burn-in.
std::vector<double> pit_series(OneStepEvaluator& evaluator, const ObservationSeries& series,
                               int burn_in);

/// One-sample Kolmogorov-Smirnov test against Uniform(0,1): (statistic, p).
std::pair<double, double> ks_uniform_test(const std::vector<double>& pit);

/// KS statistic of a sample against an arbitrary CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov p-value with the small-sample scale factor
/// sqrt(n) + 0.12 + 0.11/sqrt(n).
double ks_asymptotic_p(double d, std::size_t n);

struct CoverageResult {
  double coverage = 0.0;
  double mean_width = 0.0;
};

/// Fraction of realized values inside the central predictive interval at the
/// given level, plus mean interval width, past the burn-in.
CoverageResult coverage_and_width(OneStepEvaluator& evaluator, const ObservationSeries& series,
                                  double level, int burn_in);

struct LjungBoxResult {
  double q = 0.0;
  double p = 1.0;
  double lag1_autocorr = 0.0;
};

/// Ljung-Box Q over the first `lags` autocorrelations, chi-square p.
LjungBoxResult ljung_box(const std::vector<double>& x, int lags);

/// Joint calibration summary. The KS p-value assumes independent PITs; the
/// Ljung-Box companion is always carried alongside because sequential PITs
/// are autocorrelated and the KS p alone overstates the evidence.
struct CalibrationReport {
  std::vector<double> pit;
  double ks_stat = 0.0;
  double ks_p = 0.0;
  double coverage90 = 0.0;
  double mean_iw90 = 0.0;
  double log_pred_lik = 0.0;
  double lag1_autocorr = 0.0;
  double ljung_box_q = 0.0;
  double ljung_box_p = 1.0;
  int n_eval = 0;
};

/// Single-pass PIT + coverage + log predictive likelihood + dependence checks.
CalibrationReport calibrate(OneStepEvaluator& evaluator, const ObservationSeries& series,
                            int burn_in, double level = 0.90);

enum class GridMode { univariate_route, multivariate_route };

struct GridCell {
  double alpha = 0.0;
  double gamma = 0.0;
  double alpha_star = 0.0;
  CalibrationReport report;
  bool failed = false;
  std::string error;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t selected = 0;  // index into cells
};

/// Empirical-Bayes search over the (alpha, gamma) grid. Selection: highest KS
/// p-value, ties broken by higher log predictive likelihood, then smaller
/// gamma. Cell failures are recorded and skipped.
GridResult grid_search(const ObservationSeries& series, const std::vector<double>& alpha_grid,
                       const std::vector<double>& gamma_grid, GridMode mode, int burn_in,
                       int jobs = 1);

}  // namespace dyngam

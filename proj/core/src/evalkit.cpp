#include "dyngam/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyngam/errors.hpp"
#include "dyngam/parallel.hpp"
#include "dyngam/special_functions.hpp"

namespace dyngam {

namespace {

double route_sum(const ObservationRecord& obs) {
  double s = 0.0;
  for (double v : obs.y) s += v;
  return s;
}

class MultivariateRouteEvaluator final : public OneStepEvaluator {
 public:
  MultivariateRouteEvaluator(const HyperParams& hyper, const CorridorModel& model,
                             const GammaState& init)
      : hyper_(hyper), model_(model), state_(init) {}

  double observable(const ObservationRecord& obs) const override { return route_sum(obs); }

  double predictive_cdf_at(double value) const override {
    return route_cdf(current_route_law(), value);
  }

  std::pair<double, double> central_interval(double level) const override {
    const RoutePredictive rp = current_route_law();
    const double tail = 0.5 * (1.0 - level);
    return {route_quantile(rp, tail), route_quantile(rp, 1.0 - tail)};
  }

  double log_predictive(const ObservationRecord& obs) const override {
    return joint_predictive_logpdf(evolve_state(state_, hyper_), hyper_, model_, obs.y,
                                   obs.u);
  }

  void absorb(const ObservationRecord& obs) override {
    state_ = update_state_mv(evolve_state(state_, hyper_), hyper_, model_, obs);
  }

 private:
  RoutePredictive current_route_law() const {
    return route_predictive(hyper_, model_, evolve_state(state_, hyper_));
  }

  HyperParams hyper_;
  CorridorModel model_;
  GammaState state_;
};

class UnivariateRouteEvaluator final : public OneStepEvaluator {
 public:
  UnivariateRouteEvaluator(const HyperParams& hyper, const GammaState& init)
      : hyper_(hyper), state_(init) {}

  double observable(const ObservationRecord& obs) const override { return route_sum(obs); }

  double predictive_cdf_at(double value) const override {
    return predictive_cdf(evolve_state(state_, hyper_), hyper_, value);
  }

  std::pair<double, double> central_interval(double level) const override {
    const GammaState prior = evolve_state(state_, hyper_);
    const double tail = 0.5 * (1.0 - level);
    return {predictive_quantile(prior, hyper_, tail),
            predictive_quantile(prior, hyper_, 1.0 - tail)};
  }

  double log_predictive(const ObservationRecord& obs) const override {
    return predictive_logpdf(evolve_state(state_, hyper_), hyper_, route_sum(obs), obs.u);
  }

  void absorb(const ObservationRecord& obs) override {
    ObservationRecord route_obs;
    route_obs.t = obs.t;
    route_obs.y = {route_sum(obs)};
    route_obs.u = obs.u;
    state_ = update_state(evolve_state(state_, hyper_), hyper_, route_obs);
  }

 private:
  HyperParams hyper_;
  GammaState state_;
};

}  // namespace

std::unique_ptr<OneStepEvaluator> make_multivariate_route_evaluator(
    const HyperParams& hyper, const CorridorModel& model, const GammaState& init) {
  return std::make_unique<MultivariateRouteEvaluator>(hyper, model, init);
}

std::unique_ptr<OneStepEvaluator> make_univariate_route_evaluator(const HyperParams& hyper,
                                                                  const GammaState& init) {
  return std::make_unique<UnivariateRouteEvaluator>(hyper, init);
}

std::vector<double> pit_series(OneStepEvaluator& evaluator, const ObservationSeries& series,
                               int burn_in) {
  if (burn_in < 0) throw ConfigError("pit_series: burn_in must be nonnegative");
  std::vector<double> pit;
  pit.reserve(series.size() > static_cast<std::size_t>(burn_in)
                  ? series.size() - burn_in : 0);
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (t >= static_cast<std::size_t>(burn_in)) {
      pit.push_back(evaluator.predictive_cdf_at(evaluator.observable(series[t])));
    }
    evaluator.absorb(series[t]);
  }
  return pit;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DataError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_asymptotic_p(double d, std::size_t n) {
  if (d <= 0.0) return 1.0;
  const double sq = std::sqrt(static_cast<double>(n));
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::pair<double, double> ks_uniform_test(const std::vector<double>& pit) {
  for (double u : pit) {
    if (!std::isfinite(u) || u < 0.0 || u > 1.0) {
      throw DataError("ks_uniform_test: PIT values must lie in [0, 1]");
    }
  }
  const double d = ks_statistic(pit, [](double x) { return x; });
  return {d, ks_asymptotic_p(d, pit.size())};
}

CoverageResult coverage_and_width(OneStepEvaluator& evaluator,
                                  const ObservationSeries& series, double level,
                                  int burn_in) {
  if (level <= 0.0 || level >= 1.0) {
    throw ConfigError("coverage_and_width: level must lie in (0, 1)");
  }
  std::size_t n = 0, covered = 0;
  double width_sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (t >= static_cast<std::size_t>(burn_in)) {
      const auto [lo, hi] = evaluator.central_interval(level);
      const double v = evaluator.observable(series[t]);
      if (v >= lo && v <= hi) ++covered;
      width_sum += hi - lo;
      ++n;
    }
    evaluator.absorb(series[t]);
  }
  if (n == 0) throw DataError("coverage_and_width: no evaluation points past burn-in");
  return {static_cast<double>(covered) / static_cast<double>(n),
          width_sum / static_cast<double>(n)};
}

LjungBoxResult ljung_box(const std::vector<double>& x, int lags) {
  const std::size_t n = x.size();
  if (lags < 1) throw ConfigError("ljung_box: lags must be >= 1");
  if (n <= static_cast<std::size_t>(lags)) {
    throw DataError("ljung_box: series shorter than lag count");
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) return {0.0, 1.0, 0.0};
  LjungBoxResult out;
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) {
      num += (x[t] - mean) * (x[t + k] - mean);
    }
    const double rho = num / denom;
    if (k == 1) out.lag1_autocorr = rho;
    q += rho * rho / static_cast<double>(n - k);
  }
  out.q = static_cast<double>(n) * (static_cast<double>(n) + 2.0) * q;
  out.p = chi_square_upper_tail(out.q, static_cast<double>(lags));
  return out;
}

CalibrationReport calibrate(OneStepEvaluator& evaluator, const ObservationSeries& series,
                            int burn_in, double level) {
  if (burn_in < 0) throw ConfigError("calibrate: burn_in must be nonnegative");
  CalibrationReport rep;
  std::size_t covered = 0;
  double width_sum = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (t >= static_cast<std::size_t>(burn_in)) {
      const double v = evaluator.observable(series[t]);
      rep.pit.push_back(evaluator.predictive_cdf_at(v));
      const auto [lo, hi] = evaluator.central_interval(level);
      if (v >= lo && v <= hi) ++covered;
      width_sum += hi - lo;
      rep.log_pred_lik += evaluator.log_predictive(series[t]);
    }
    evaluator.absorb(series[t]);
  }
  rep.n_eval = static_cast<int>(rep.pit.size());
  if (rep.n_eval == 0) throw DataError("calibrate: no evaluation points past burn-in");
  const auto [d, p] = ks_uniform_test(rep.pit);
  rep.ks_stat = d;
  rep.ks_p = p;
  rep.coverage90 = static_cast<double>(covered) / static_cast<double>(rep.n_eval);
  rep.mean_iw90 = width_sum / static_cast<double>(rep.n_eval);
  const LjungBoxResult lb = ljung_box(rep.pit, 1);
  rep.lag1_autocorr = lb.lag1_autocorr;
  rep.ljung_box_q = lb.q;
  rep.ljung_box_p = lb.p;
  return rep;
}

GridResult grid_search(const ObservationSeries& series, const std::vector<double>& alpha_grid,
                       const std::vector<double>& gamma_grid, GridMode mode, int burn_in,
                       int jobs) {
  if (alpha_grid.empty() || gamma_grid.empty()) {
    throw ConfigError("grid_search: empty hyperparameter grid");
  }
  if (series.empty()) throw DataError("grid_search: empty series");

  // Segment rates do not depend on (alpha, gamma); calibrate once.
  const bool multivariate = (mode == GridMode::multivariate_route);
  std::unique_ptr<CorridorModel> model;
  if (multivariate) model = std::make_unique<CorridorModel>(calibrate_lambdas(series));

  GridResult result;
  result.cells.resize(alpha_grid.size() * gamma_grid.size());

  parallel_for(result.cells.size(), jobs, [&](std::size_t idx) {
    GridCell& cell = result.cells[idx];
    cell.alpha = alpha_grid[idx / gamma_grid.size()];
    cell.gamma = gamma_grid[idx % gamma_grid.size()];
    try {
      const HyperParams hyper(cell.alpha, cell.gamma);
      std::unique_ptr<OneStepEvaluator> ev;
      if (multivariate) {
        cell.alpha_star = moment_match(hyper, *model).first;
        ev = make_multivariate_route_evaluator(
            hyper, *model, default_init_state_mv(series, hyper, *model));
      } else {
        cell.alpha_star = cell.alpha;
        ObservationSeries route_series = series;
        for (auto& obs : route_series) {
          double s = 0.0;
          for (double v : obs.y) s += v;
          obs.y = {s};
        }
        ev = make_univariate_route_evaluator(hyper,
                                             default_init_state(route_series, hyper));
        cell.report = calibrate(*ev, route_series, burn_in);
        return;
      }
      cell.report = calibrate(*ev, series, burn_in);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });

  // Select: max KS p, ties by higher log predictive likelihood, then smaller gamma.
  bool found = false;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const GridCell& c = result.cells[i];
    if (c.failed) continue;
    if (!found) {
      result.selected = i;
      found = true;
      continue;
    }
    const GridCell& best = result.cells[result.selected];
    constexpr double kTie = 1e-9;
    if (c.report.ks_p > best.report.ks_p + kTie) {
      result.selected = i;
    } else if (std::fabs(c.report.ks_p - best.report.ks_p) <= kTie) {
      if (c.report.log_pred_lik > best.report.log_pred_lik + kTie) {
        result.selected = i;
      } else if (std::fabs(c.report.log_pred_lik - best.report.log_pred_lik) <= kTie &&
                 c.gamma < best.gamma) {
        result.selected = i;
      }
    }
  }
  if (!found) throw NumericError("grid_search: every grid cell failed");
  return result;
}

}  // namespace dyngam

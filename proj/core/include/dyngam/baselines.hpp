#pragma once

#include <string>
#include <vector>

#include "dyngam/distributions.hpp"
#include "dyngam/rng.hpp"

namespace dyngam {

enum class FitFamily { gamma, lognormal, inverse_gaussian, weibull, normal };

std::string family_name(FitFamily family);
FitFamily family_from_name(const std::string& name);

/// Maximum-likelihood fit of one parametric family to pooled route travel
/// times, with AIC/BIC and a KS test against the fitted law. The KS p-value
/// uses the plain asymptotic distribution with no correction for estimated
/// parameters, which is optimistic; it is the convention the reported
/// comparisons use.
struct StaticFit {
  FitFamily family = FitFamily::gamma;
  std::vector<double> params;  // family-specific, see fit_static
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double ks_stat = 0.0;
  double ks_p = 0.0;

  double cdf(double x) const;
  double quantile(double q) const;
};

/// params layout: gamma (shape, rate); lognormal (mu, sigma);
/// inverse_gaussian (mu, lambda); weibull (shape, scale); normal (mu, sigma).
StaticFit fit_static(const std::vector<double>& route_tt, FitFamily family);

struct MixtureConfig {
  int restarts = 10;
  double tol = 1e-8;
  int max_iter = 500;
};

/// Gamma mixture fitted by EM, best of the random restarts; components sorted
/// by ascending mean.
struct MixtureFit {
  int k = 1;
  std::vector<double> weights;
  std::vector<double> shapes;
  std::vector<double> rates;
  double loglik = 0.0;
  double bic = 0.0;
  bool converged = false;

  double component_mean(int i) const { return shapes[i] / rates[i]; }
};

MixtureFit fit_gamma_mixture(const std::vector<double>& route_tt, int K,
                             const MixtureConfig& config, Rng& rng);

/// Static route laws used as comparison baselines. All are time-invariant.
struct GammaRouteLaw {
  GammaLaw law;
  double cdf(double x) const { return gamma_cdf(law, x); }
  double quantile(double q) const { return gamma_quantile(law, q); }
};

struct NormalRouteLaw {
  double mean = 0.0;
  double sd = 1.0;
  double cdf(double x) const;
  double quantile(double q) const;
};

/// Sorted Monte Carlo draws standing in for a route law.
struct EmpiricalRouteLaw {
  std::vector<double> sorted_draws;
  bool correlation_repaired = false;  // eigenvalue clipping was applied
  double cdf(double x) const;
  double quantile(double q) const;
};

/// Per-segment Gamma fits summed under independence, moment-matched to one
/// Gamma. segment_tt is row-major: one row per time period, one column per
/// segment.
GammaRouteLaw route_indep_gamma(const std::vector<std::vector<double>>& segment_tt);

/// Normal(sum of segment means, sum of segment variances) under independence.
NormalRouteLaw route_indep_normal(const std::vector<std::vector<double>>& segment_tt);

/// Gaussian copula over Gamma marginals: normal scores through the fitted
/// marginal CDFs, Pearson correlation of scores, multivariate normal draws
/// mapped back through the marginal quantiles and summed. A correlation
/// matrix that fails Cholesky is repaired by clipping eigenvalues at 1e-6.
EmpiricalRouteLaw route_copula_mc(const std::vector<std::vector<double>>& segment_tt,
                                  std::size_t n_draws, Rng& rng);

/// Var(route sum) / sum of per-segment variances; about 1 under independence,
/// larger when segments co-move.
double variance_underestimation_ratio(const std::vector<std::vector<double>>& segment_tt);

}  // namespace dyngam

#pragma once

#include "dyngam/rng.hpp"

namespace dyngam {

/// Gamma law in the rate parameterization: mean = shape/rate, variance = shape/rate^2.
/// Every Gamma in this library is rate-parameterized; there is no scale constructor.
struct GammaLaw {
  double shape;
  double rate;

  GammaLaw(double shape_in, double rate_in);

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
};

/// F distribution with df1, df2 > 0 degrees of freedom.
struct FLaw {
  double df1;
  double df2;

  FLaw(double df1_in, double df2_in);
};

double gamma_logpdf(const GammaLaw& law, double x);
double gamma_cdf(const GammaLaw& law, double x);

/// Inverse CDF for q in (0, 1); bracketed Newton on gamma_cdf.
double gamma_quantile(const GammaLaw& law, double q);

/// Marsaglia-Tsang draw; shape < 1 handled by the boost U^(1/shape).
double gamma_sample(const GammaLaw& law, Rng& rng);

/// Beta(a, b) draw via Cheng's rejection algorithms (BB for min(a,b) > 1, BC otherwise).
double beta_sample(double a, double b, Rng& rng);

double f_pdf(const FLaw& law, double x);
double f_cdf(const FLaw& law, double x);

/// Inverse F CDF: bracketed bisection refined by Newton, tolerance 1e-12 in
/// probability, iteration cap 200. Throws NumericError with diagnostics on
/// non-convergence.
double f_quantile(const FLaw& law, double q);

}  // namespace dyngam

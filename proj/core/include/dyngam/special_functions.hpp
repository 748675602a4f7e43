#pragma once

#include <cstddef>

namespace dyngam {

/// ln Gamma(x) for x > 0 (Lanczos series, relative error below 1e-13 over
/// [1e-6, 1e6]). Throws DomainError on nonpositive or non-finite input.
double log_gamma_fn(double x);

/// ln Beta(a, b).
double log_beta_fn(double a, double b);

/// Digamma function psi(x) for x > 0.
double digamma(double x);

/// Regularized incomplete beta I_x(a, b), absolute error <= 1e-12.
/// Continued fraction with the symmetry switch at x = (a+1)/(a+b+2).
double reg_inc_beta(double a, double b, double x);

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
double reg_inc_gamma_lower(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double reg_inc_gamma_upper(double a, double x);

/// Standard normal CDF.
double normal_cdf(double x);

/// log of the standard normal CDF, stable far into the lower tail.
double log_normal_cdf(double x);

/// Standard normal quantile for p in (0, 1).
double normal_quantile(double p);

/// Chi-square upper tail probability P(X > x) with df degrees of freedom.
double chi_square_upper_tail(double x, double df);

}  // namespace dyngam

#include "dyngam/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dyngam/errors.hpp"

namespace dyngam {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_finite_positive(double x, const char* fn) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError(std::string(fn) + ": argument must be finite and positive, got " +
                      std::to_string(x));
  }
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-16;
  const double fpmin = std::numeric_limits<double>::min() / kEps;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) return h;
  }
  throw NumericError("reg_inc_beta: continued fraction failed to converge (a=" +
                     std::to_string(a) + ", b=" + std::to_string(b) + ", x=" +
                     std::to_string(x) + ")");
}

// Series form of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  constexpr int kMaxIter = 2000;
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 1; n <= kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) {
      return sum * std::exp(-x + a * std::log(x) - log_gamma_fn(a));
    }
  }
  throw NumericError("reg_inc_gamma: series failed to converge (a=" + std::to_string(a) +
                     ", x=" + std::to_string(x) + ")");
}

// Continued fraction for Q(a, x), valid for x >= a + 1 (modified Lentz).
double gamma_q_cf(double a, double x) {
  constexpr int kMaxIter = 2000;
  constexpr double kEps = 1e-16;
  const double fpmin = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) {
      return std::exp(-x + a * std::log(x) - log_gamma_fn(a)) * h;
    }
  }
  throw NumericError("reg_inc_gamma: continued fraction failed to converge (a=" +
                     std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

}  // namespace

double log_gamma_fn(double x) {
  require_finite_positive(x, "log_gamma_fn");
  // 14-term Lanczos series (g = 5.2421875), accurate to ~1e-15 relative.
  static const double cof[14] = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   0.339946499848118887e-4, 0.465236289270485756e-4,
      -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
      0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
      -0.261908384015814087e-4, 0.368991826595316234e-5};
  double y = x;
  double tmp = x + 5.24218750000000000;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (int j = 0; j < 14; ++j) ser += cof[j] / ++y;
  return tmp + std::log(2.5066282746310005 * ser / x);
}

double log_beta_fn(double a, double b) {
  return log_gamma_fn(a) + log_gamma_fn(b) - log_gamma_fn(a + b);
}

double digamma(double x) {
  require_finite_positive(x, "digamma");
  double result = 0.0;
  // Shift into the asymptotic region.
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                     inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result;
}

double reg_inc_beta(double a, double b, double x) {
  require_finite_positive(a, "reg_inc_beta");
  require_finite_positive(b, "reg_inc_beta");
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
    throw DomainError("reg_inc_beta: x must lie in [0, 1], got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double reg_inc_gamma_lower(double a, double x) {
  require_finite_positive(a, "reg_inc_gamma_lower");
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("reg_inc_gamma_lower: x must be nonnegative, got " +
                      std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double reg_inc_gamma_upper(double a, double x) {
  require_finite_positive(a, "reg_inc_gamma_upper");
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("reg_inc_gamma_upper: x must be nonnegative, got " +
                      std::to_string(x));
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double log_normal_cdf(double x) {
  if (x > -10.0) {
    const double p = normal_cdf(x);
    if (p > 0.0) return std::log(p);
  }
  // Asymptotic expansion of the Mills ratio for the deep lower tail.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x * std::sqrt(2.0 * kPi)) + std::log(series);
}

double normal_quantile(double p) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
    throw DomainError("normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  // Bracketed Newton on the CDF; crude tail-asymptotic start.
  const double q = std::min(p, 1.0 - p);
  double x0 = std::sqrt(std::max(0.0, -2.0 * std::log(q)));
  if (p < 0.5) x0 = -x0;
  double lo = -40.0, hi = 40.0;
  double x = std::clamp(x0, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double f = normal_cdf(x) - p;
    if (std::fabs(f) < 1e-16) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    double xn = (pdf > 0.0) ? x - f / pdf : 0.0;
    if (!(xn > lo && xn < hi) || pdf == 0.0) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < 1e-16 * (1.0 + std::fabs(x))) return x;
    x = xn;
  }
  return x;
}

double chi_square_upper_tail(double x, double df) {
  require_finite_positive(df, "chi_square_upper_tail");
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("chi_square_upper_tail: x must be nonnegative, got " +
                      std::to_string(x));
  }
  return reg_inc_gamma_upper(0.5 * df, 0.5 * x);
}

}  // namespace dyngam

#include "dyngam/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dyngam/errors.hpp"
#include "dyngam/special_functions.hpp"

namespace dyngam {

namespace {

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw DomainError(std::string(what) + " must be finite and positive, got " +
                      std::to_string(v));
  }
}

// Draw from Gamma(shape, 1) with shape >= 1 (Marsaglia-Tsang squeeze).
double gamma_std_sample(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

constexpr double kLn4 = 1.3862943611198906;  // ln 4

// Cheng (1978) algorithm BB: both parameters above 1.
double beta_cheng_bb(double a0, double b0, Rng& rng) {
  const double a = std::min(a0, b0);
  const double b = std::max(a0, b0);
  const double alpha = a + b;
  const double beta = std::sqrt((alpha - 2.0) / (2.0 * a * b - alpha));
  const double gamma = a + 1.0 / beta;
  double w;
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double v = beta * std::log(u1 / (1.0 - u1));
    w = (v > 700.0) ? std::numeric_limits<double>::max() : a * std::exp(v);
    const double z = u1 * u1 * u2;
    const double r = gamma * v - kLn4;
    const double s = a + r - w;
    if (s + 2.609437912434100 >= 5.0 * z) break;  // 1 + ln 5 squeeze
    const double t = std::log(z);
    if (s >= t) break;
    if (r + alpha * std::log(alpha / (b + w)) >= t) break;
  }
  return (a == a0) ? w / (b + w) : b / (b + w);
}

// Cheng (1978) algorithm BC: min parameter at or below 1.
double beta_cheng_bc(double a0, double b0, Rng& rng) {
  const double a = std::max(a0, b0);
  const double b = std::min(a0, b0);
  const double alpha = a + b;
  const double beta = 1.0 / b;
  const double delta = 1.0 + a - b;
  const double k1 = delta * (1.0 / 72.0 + b / 24.0) / (a / b - 7.0 / 9.0);
  const double k2 = 0.25 + (0.5 + 0.25 / delta) * b;
  double w;
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    if (u1 < 0.5) {
      const double y = u1 * u2;
      const double z = u1 * y;
      if (0.25 * u2 + z - y >= k1) continue;
      const double v = beta * std::log(u1 / (1.0 - u1));
      w = (v > 700.0) ? std::numeric_limits<double>::max() : a * std::exp(v);
      if (alpha * (std::log(alpha / (b + w)) + v) - kLn4 >= std::log(z)) break;
    } else {
      const double z = u1 * u1 * u2;
      if (z <= 0.25) {
        const double v = beta * std::log(u1 / (1.0 - u1));
        w = (v > 700.0) ? std::numeric_limits<double>::max() : a * std::exp(v);
        break;
      }
      if (z >= k2) continue;
      const double v = beta * std::log(u1 / (1.0 - u1));
      w = (v > 700.0) ? std::numeric_limits<double>::max() : a * std::exp(v);
      if (alpha * (std::log(alpha / (b + w)) + v) - kLn4 >= std::log(z)) break;
    }
  }
  return (a == a0) ? w / (b + w) : b / (b + w);
}

}  // namespace

GammaLaw::GammaLaw(double shape_in, double rate_in) : shape(shape_in), rate(rate_in) {
  require_positive(shape, "GammaLaw shape");
  require_positive(rate, "GammaLaw rate");
}

FLaw::FLaw(double df1_in, double df2_in) : df1(df1_in), df2(df2_in) {
  require_positive(df1, "FLaw df1");
  require_positive(df2, "FLaw df2");
}

double gamma_logpdf(const GammaLaw& law, double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("gamma_logpdf: x must be positive, got " + std::to_string(x));
  }
  return law.shape * std::log(law.rate) - log_gamma_fn(law.shape) +
         (law.shape - 1.0) * std::log(x) - law.rate * x;
}

double gamma_cdf(const GammaLaw& law, double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("gamma_cdf: x must be nonnegative, got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  return reg_inc_gamma_lower(law.shape, law.rate * x);
}

double gamma_quantile(const GammaLaw& law, double q) {
  if (!std::isfinite(q) || q <= 0.0 || q >= 1.0) {
    throw DomainError("gamma_quantile: q must lie in (0, 1), got " + std::to_string(q));
  }
  // Wilson-Hilferty start, then bracketed Newton on the CDF.
  const double g = law.shape;
  const double z = normal_quantile(q);
  const double wh = 1.0 - 1.0 / (9.0 * g) + z / (3.0 * std::sqrt(g));
  double x = g * wh * wh * wh;
  if (!(x > 0.0)) x = g * std::exp((std::log(q) + log_gamma_fn(g + 1.0)) / g) / g;
  if (!(x > 0.0) || !std::isfinite(x)) x = g;

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  const GammaLaw std_law(g, 1.0);
  for (int it = 0; it < 200; ++it) {
    const double f = gamma_cdf(std_law, x) - q;
    if (f > 0.0) hi = x; else lo = x;
    const double lpdf = (g - 1.0) * std::log(x) - x - log_gamma_fn(g);
    const double pdf = std::exp(lpdf);
    double xn = (pdf > 0.0) ? x - f / pdf : 0.0;
    if (!(xn > lo && xn < hi)) {
      xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x + 1.0;
    }
    if (std::fabs(f) <= 1e-13) break;
    if (std::fabs(xn - x) <= 1e-14 * (1.0 + x)) { x = xn; break; }
    x = xn;
  }
  return x / law.rate;
}

double gamma_sample(const GammaLaw& law, Rng& rng) {
  if (law.shape >= 1.0) {
    return gamma_std_sample(law.shape, rng) / law.rate;
  }
  // Boost: X ~ Gamma(shape+1), X * U^(1/shape) ~ Gamma(shape).
  const double x = gamma_std_sample(law.shape + 1.0, rng);
  const double u = rng.uniform();
  return x * std::pow(u, 1.0 / law.shape) / law.rate;
}

double beta_sample(double a, double b, Rng& rng) {
  require_positive(a, "beta_sample a");
  require_positive(b, "beta_sample b");
  if (std::min(a, b) > 1.0) return beta_cheng_bb(a, b, rng);
  return beta_cheng_bc(a, b, rng);
}

double f_pdf(const FLaw& law, double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("f_pdf: x must be positive, got " + std::to_string(x));
  }
  const double h1 = 0.5 * law.df1;
  const double h2 = 0.5 * law.df2;
  const double lnum = h1 * std::log(law.df1 * x) + h2 * std::log(law.df2) -
                      (h1 + h2) * std::log(law.df1 * x + law.df2);
  return std::exp(lnum - log_beta_fn(h1, h2)) / x;
}

double f_cdf(const FLaw& law, double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("f_cdf: x must be nonnegative, got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  const double t = law.df1 * x / (law.df1 * x + law.df2);
  return reg_inc_beta(0.5 * law.df1, 0.5 * law.df2, t);
}

double f_quantile(const FLaw& law, double q) {
  if (!std::isfinite(q) || q <= 0.0 || q >= 1.0) {
    throw DomainError("f_quantile: q must lie in (0, 1), got " + std::to_string(q));
  }
  // Bracket the root, then bisection with Newton refinement.
  double lo = 0.0;
  double hi = 1.0;
  int expand = 0;
  while (f_cdf(law, hi) < q) {
    lo = hi;
    hi *= 8.0;
    if (++expand > 400) {
      throw NumericError("f_quantile: failed to bracket q=" + std::to_string(q) +
                         " (df1=" + std::to_string(law.df1) +
                         ", df2=" + std::to_string(law.df2) + ")");
    }
  }
  double x = 0.5 * (lo + hi);
  double f = f_cdf(law, x) - q;
  for (int it = 0; it < 200; ++it) {
    if (std::fabs(f) <= 1e-12) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double pdf = f_pdf(law, x);
    double xn = (pdf > 0.0) ? x - f / pdf : 0.0;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (xn == x) return x;
    x = xn;
    f = f_cdf(law, x) - q;
  }
  if (std::fabs(f) <= 1e-9) return x;  // loose but usable; extreme df corner
  throw NumericError("f_quantile: no convergence after 200 iterations (df1=" +
                     std::to_string(law.df1) + ", df2=" + std::to_string(law.df2) +
                     ", q=" + std::to_string(q) + ", residual=" + std::to_string(f) + ")");
}

}  // namespace dyngam

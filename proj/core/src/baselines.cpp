#include "dyngam/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dyngam/errors.hpp"
#include "dyngam/evalkit.hpp"
#include "dyngam/route.hpp"
#include "dyngam/special_functions.hpp"

namespace dyngam {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

void check_sample(const std::vector<double>& x, bool positive, const char* fn) {
  if (x.size() < 10) {
    throw DataError(std::string(fn) + ": need at least 10 observations, got " +
                    std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v) || (positive && v <= 0.0)) {
      throw DataError(std::string(fn) + ": sample contains invalid values");
    }
  }
}

double sample_mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_var_mle(const std::vector<double>& x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size());
}

// Solve log(a) - digamma(a) = s for a > 0 (monotone decreasing in a).
double solve_gamma_shape(double s) {
  if (!(s > 0.0)) return 1e6;  // degenerate sample, effectively normal
  double lo = 1e-8, hi = 1e8;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double f = std::log(mid) - digamma(mid) - s;
    if (f > 0.0) lo = mid; else hi = mid;
    if (hi / lo < 1.0 + 1e-14) break;
  }
  return std::sqrt(lo * hi);
}

struct GammaMle {
  double shape;
  double rate;
  double loglik;
};

GammaMle gamma_mle_weighted(const std::vector<double>& x, const std::vector<double>& w) {
  double wsum = 0.0, wy = 0.0, wly = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    wsum += w[i];
    wy += w[i] * x[i];
    wly += w[i] * std::log(x[i]);
  }
  const double mean = wy / wsum;
  const double mean_log = wly / wsum;
  const double shape = solve_gamma_shape(std::log(mean) - mean_log);
  const double rate = shape / mean;
  double ll = wsum * (shape * std::log(rate) - log_gamma_fn(shape)) +
              (shape - 1.0) * wly - rate * wy;
  return {shape, rate, ll};
}

double weibull_shape_equation(const std::vector<double>& x, double k, double mean_log) {
  double syk = 0.0, sykly = 0.0;
  for (double v : x) {
    const double yk = std::pow(v, k);
    syk += yk;
    sykly += yk * std::log(v);
  }
  return sykly / syk - 1.0 / k - mean_log;
}

}  // namespace

std::string family_name(FitFamily family) {
  switch (family) {
    case FitFamily::gamma: return "gamma";
    case FitFamily::lognormal: return "lognormal";
    case FitFamily::inverse_gaussian: return "inverse_gaussian";
    case FitFamily::weibull: return "weibull";
    case FitFamily::normal: return "normal";
  }
  return "unknown";
}

FitFamily family_from_name(const std::string& name) {
  if (name == "gamma") return FitFamily::gamma;
  if (name == "lognormal") return FitFamily::lognormal;
  if (name == "inverse_gaussian" || name == "inverse-gaussian") {
    return FitFamily::inverse_gaussian;
  }
  if (name == "weibull") return FitFamily::weibull;
  if (name == "normal") return FitFamily::normal;
  throw ConfigError("unknown distribution family: " + name);
}

double StaticFit::cdf(double x) const {
  switch (family) {
    case FitFamily::gamma:
      return x <= 0.0 ? 0.0 : gamma_cdf(GammaLaw(params[0], params[1]), x);
    case FitFamily::lognormal:
      return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - params[0]) / params[1]);
    case FitFamily::inverse_gaussian: {
      if (x <= 0.0) return 0.0;
      const double mu = params[0], lam = params[1];
      const double r = std::sqrt(lam / x);
      const double term1 = normal_cdf(r * (x / mu - 1.0));
      const double term2 = std::exp(2.0 * lam / mu + log_normal_cdf(-r * (x / mu + 1.0)));
      return std::min(1.0, term1 + term2);
    }
    case FitFamily::weibull:
      return x <= 0.0 ? 0.0 : 1.0 - std::exp(-std::pow(x / params[1], params[0]));
    case FitFamily::normal:
      return normal_cdf((x - params[0]) / params[1]);
  }
  return 0.0;
}

double StaticFit::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("StaticFit::quantile: q outside (0, 1)");
  switch (family) {
    case FitFamily::gamma:
      return gamma_quantile(GammaLaw(params[0], params[1]), q);
    case FitFamily::lognormal:
      return std::exp(params[0] + params[1] * normal_quantile(q));
    case FitFamily::weibull:
      return params[1] * std::pow(-std::log1p(-q), 1.0 / params[0]);
    case FitFamily::normal:
      return params[0] + params[1] * normal_quantile(q);
    case FitFamily::inverse_gaussian: {
      // No closed form; bracketed bisection on the CDF.
      double lo = 1e-12, hi = params[0];
      while (cdf(hi) < q) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < q) lo = mid; else hi = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

StaticFit fit_static(const std::vector<double>& route_tt, FitFamily family) {
  const bool needs_positive = family != FitFamily::normal;
  check_sample(route_tt, needs_positive, "fit_static");
  if (family != FitFamily::normal) {
    for (double v : route_tt) {
      if (v <= 0.0) {
        throw DataError("fit_static: nonpositive data for a positive-support family");
      }
    }
  }
  const double n = static_cast<double>(route_tt.size());
  const double mean = sample_mean(route_tt);
  StaticFit fit;
  fit.family = family;

  switch (family) {
    case FitFamily::gamma: {
      const std::vector<double> w(route_tt.size(), 1.0);
      const GammaMle g = gamma_mle_weighted(route_tt, w);
      fit.params = {g.shape, g.rate};
      fit.loglik = g.loglik;
      break;
    }
    case FitFamily::lognormal: {
      double mu = 0.0;
      for (double v : route_tt) mu += std::log(v);
      mu /= n;
      double s2 = 0.0;
      for (double v : route_tt) s2 += (std::log(v) - mu) * (std::log(v) - mu);
      s2 /= n;
      const double sigma = std::sqrt(s2);
      double ll = -0.5 * n * std::log(kTwoPi) - n * std::log(sigma) - 0.5 * n;
      for (double v : route_tt) ll -= std::log(v);
      fit.params = {mu, sigma};
      fit.loglik = ll;
      break;
    }
    case FitFamily::inverse_gaussian: {
      double inv_dev = 0.0;
      for (double v : route_tt) inv_dev += 1.0 / v - 1.0 / mean;
      const double lam = n / inv_dev;
      double ll = 0.0;
      for (double v : route_tt) {
        ll += 0.5 * std::log(lam / (kTwoPi * v * v * v)) -
              lam * (v - mean) * (v - mean) / (2.0 * mean * mean * v);
      }
      fit.params = {mean, lam};
      fit.loglik = ll;
      break;
    }
    case FitFamily::weibull: {
      double mean_log = 0.0;
      for (double v : route_tt) mean_log += std::log(v);
      mean_log /= n;
      // Profile likelihood in the shape; the equation is increasing in k.
      double lo = 1e-3, hi = 1.0;
      while (weibull_shape_equation(route_tt, hi, mean_log) < 0.0 && hi < 1e3) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (weibull_shape_equation(route_tt, mid, mean_log) < 0.0) lo = mid; else hi = mid;
      }
      const double k = 0.5 * (lo + hi);
      double syk = 0.0;
      for (double v : route_tt) syk += std::pow(v, k);
      const double scale = std::pow(syk / n, 1.0 / k);
      double ll = n * (std::log(k) - k * std::log(scale));
      for (double v : route_tt) {
        ll += (k - 1.0) * std::log(v) - std::pow(v / scale, k);
      }
      fit.params = {k, scale};
      fit.loglik = ll;
      break;
    }
    case FitFamily::normal: {
      const double var = sample_var_mle(route_tt, mean);
      const double sd = std::sqrt(var);
      const double ll = -0.5 * n * (std::log(kTwoPi) + 2.0 * std::log(sd) + 1.0);
      fit.params = {mean, sd};
      fit.loglik = ll;
      break;
    }
  }

  constexpr double k_params = 2.0;
  fit.aic = 2.0 * k_params - 2.0 * fit.loglik;
  fit.bic = k_params * std::log(n) - 2.0 * fit.loglik;
  fit.ks_stat = ks_statistic(route_tt, [&fit](double x) { return fit.cdf(x); });
  fit.ks_p = ks_asymptotic_p(fit.ks_stat, route_tt.size());
  return fit;
}

MixtureFit fit_gamma_mixture(const std::vector<double>& route_tt, int K,
                             const MixtureConfig& config, Rng& rng) {
  if (K < 1) throw ConfigError("fit_gamma_mixture: K must be >= 1");
  if (route_tt.size() < static_cast<std::size_t>(10 * K)) {
    throw DataError("fit_gamma_mixture: need at least 10 observations per component");
  }
  check_sample(route_tt, true, "fit_gamma_mixture");
  const std::size_t n = route_tt.size();

  MixtureFit best;
  best.loglik = -std::numeric_limits<double>::infinity();

  const int restarts = (K == 1) ? 1 : std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    // Initialize components on random quantile splits of the sample.
    std::vector<double> weights(K, 1.0 / K);
    std::vector<double> shapes(K), rates(K);
    std::vector<double> sorted = route_tt;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < K; ++k) {
      const double q = (k + 0.5) / K;
      const double jitter = (K == 1) ? 0.0 : 0.3 * (rng.uniform() - 0.5) / K;
      const double center =
          sorted[std::min(n - 1, static_cast<std::size_t>(std::clamp(q + jitter, 0.01, 0.99) *
                                                          static_cast<double>(n)))];
      shapes[k] = 4.0;
      rates[k] = shapes[k] / center;
    }

    std::vector<std::vector<double>> resp(K, std::vector<double>(n));
    double prev_ll = -std::numeric_limits<double>::infinity();
    double ll = prev_ll;
    bool converged = false;

    for (int iter = 0; iter < config.max_iter; ++iter) {
      // E step in log space.
      ll = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double max_lp = -std::numeric_limits<double>::infinity();
        std::vector<double> lp(K);
        for (int k = 0; k < K; ++k) {
          lp[k] = std::log(weights[k]) +
                  gamma_logpdf(GammaLaw(shapes[k], rates[k]), route_tt[i]);
          max_lp = std::max(max_lp, lp[k]);
        }
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += std::exp(lp[k] - max_lp);
        ll += max_lp + std::log(sum);
        for (int k = 0; k < K; ++k) {
          resp[k][i] = std::exp(lp[k] - max_lp) / sum;
        }
      }
      // M step: weighted Gamma MLE per component.
      for (int k = 0; k < K; ++k) {
        double wk = std::accumulate(resp[k].begin(), resp[k].end(), 0.0);
        wk = std::max(wk, 1e-10 * static_cast<double>(n));
        weights[k] = wk / static_cast<double>(n);
        const GammaMle g = gamma_mle_weighted(route_tt, resp[k]);
        shapes[k] = g.shape;
        rates[k] = g.rate;
      }
      if (std::isfinite(prev_ll) && ll < prev_ll - 1e-9 * (1.0 + std::fabs(ll))) {
        throw NumericError("fit_gamma_mixture: EM log likelihood decreased");
      }
      if (std::fabs(ll - prev_ll) < config.tol * (1.0 + std::fabs(ll))) {
        converged = true;
        break;
      }
      prev_ll = ll;
    }

    if (ll > best.loglik) {
      best.k = K;
      best.weights = weights;
      best.shapes = shapes;
      best.rates = rates;
      best.loglik = ll;
      best.converged = converged;
    }
  }

  // Canonical ordering: components sorted by ascending mean.
  std::vector<std::size_t> idx(K);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return best.shapes[a] / best.rates[a] < best.shapes[b] / best.rates[b];
  });
  MixtureFit sorted_fit = best;
  for (int k = 0; k < K; ++k) {
    sorted_fit.weights[k] = best.weights[idx[k]];
    sorted_fit.shapes[k] = best.shapes[idx[k]];
    sorted_fit.rates[k] = best.rates[idx[k]];
  }
  const double n_params = 3.0 * K - 1.0;
  sorted_fit.bic = n_params * std::log(static_cast<double>(n)) - 2.0 * sorted_fit.loglik;
  return sorted_fit;
}

double NormalRouteLaw::cdf(double x) const { return normal_cdf((x - mean) / sd); }
double NormalRouteLaw::quantile(double q) const { return mean + sd * normal_quantile(q); }

double EmpiricalRouteLaw::cdf(double x) const {
  const auto it = std::upper_bound(sorted_draws.begin(), sorted_draws.end(), x);
  return static_cast<double>(it - sorted_draws.begin()) /
         static_cast<double>(sorted_draws.size());
}

double EmpiricalRouteLaw::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("EmpiricalRouteLaw::quantile: q outside (0,1)");
  return empirical_quantile(sorted_draws, q);
}

namespace {

void check_matrix(const std::vector<std::vector<double>>& m, const char* fn) {
  if (m.size() < 3) throw DataError(std::string(fn) + ": need at least 3 rows");
  const std::size_t cols = m.front().size();
  if (cols == 0) throw ShapeError(std::string(fn) + ": empty rows");
  for (const auto& row : m) {
    if (row.size() != cols) throw ShapeError(std::string(fn) + ": ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v) || v <= 0.0) {
        throw DataError(std::string(fn) + ": nonpositive entry");
      }
    }
  }
}

std::vector<double> column(const std::vector<std::vector<double>>& m, std::size_t j) {
  std::vector<double> out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(row[j]);
  return out;
}

// Cycle Jacobi eigendecomposition of a symmetric matrix (row-major, size n).
// Small n only; returns eigenvalues and overwrites `vecs` with column eigenvectors.
void jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigvals,
                  std::vector<double>& vecs) {
  vecs.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p * n + q]) < 1e-18) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vecs[k * n + p];
          const double vkq = vecs[k * n + q];
          vecs[k * n + p] = c * vkp - s * vkq;
          vecs[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  eigvals.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigvals[i] = a[i * n + i];
}

// Cholesky factor (lower). Returns false when the matrix is not numerically
// positive definite (pivot at or below 1e-10 counts as rank-deficient).
bool cholesky(const std::vector<double>& a, std::size_t n, std::vector<double>& chol) {
  chol.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= chol[i * n + k] * chol[j * n + k];
      if (i == j) {
        if (sum <= 1e-10) return false;
        chol[i * n + i] = std::sqrt(sum);
      } else {
        chol[i * n + j] = sum / chol[j * n + j];
      }
    }
  }
  return true;
}

}  // namespace

GammaRouteLaw route_indep_gamma(const std::vector<std::vector<double>>& segment_tt) {
  check_matrix(segment_tt, "route_indep_gamma");
  const std::size_t m = segment_tt.front().size();
  double mean_sum = 0.0, var_sum = 0.0;
  const std::vector<double> w(segment_tt.size(), 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    const GammaMle g = gamma_mle_weighted(column(segment_tt, j), w);
    mean_sum += g.shape / g.rate;
    var_sum += g.shape / (g.rate * g.rate);
  }
  // Moment-match the independent sum with a single Gamma.
  return {GammaLaw(mean_sum * mean_sum / var_sum, mean_sum / var_sum)};
}

NormalRouteLaw route_indep_normal(const std::vector<std::vector<double>>& segment_tt) {
  check_matrix(segment_tt, "route_indep_normal");
  const std::size_t m = segment_tt.front().size();
  double mean_sum = 0.0, var_sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = column(segment_tt, j);
    const double mu = sample_mean(col);
    mean_sum += mu;
    var_sum += sample_var_mle(col, mu);
  }
  return {mean_sum, std::sqrt(var_sum)};
}

EmpiricalRouteLaw route_copula_mc(const std::vector<std::vector<double>>& segment_tt,
                                  std::size_t n_draws, Rng& rng) {
  check_matrix(segment_tt, "route_copula_mc");
  const std::size_t n = segment_tt.size();
  const std::size_t m = segment_tt.front().size();
  if (n < m + 2) {
    throw DataError("route_copula_mc: need at least m + 2 rows to estimate correlation");
  }
  if (n_draws == 0) throw ConfigError("route_copula_mc: n_draws must be positive");

  // Gamma marginals and normal scores.
  std::vector<GammaLaw> marginals;
  marginals.reserve(m);
  std::vector<std::vector<double>> scores(n, std::vector<double>(m));
  const std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = column(segment_tt, j);
    const GammaMle g = gamma_mle_weighted(col, w);
    marginals.emplace_back(g.shape, g.rate);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = std::clamp(gamma_cdf(marginals[j], col[i]), 1e-10, 1.0 - 1e-10);
      scores[i][j] = normal_quantile(u);
    }
  }

  // Pearson correlation of the normal scores.
  std::vector<double> mu(m, 0.0), sd(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) mu[j] += scores[i][j];
    mu[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      sd[j] += (scores[i][j] - mu[j]) * (scores[i][j] - mu[j]);
    }
    sd[j] = std::sqrt(sd[j] / static_cast<double>(n - 1));
  }
  std::vector<double> corr(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    corr[a * m + a] = 1.0;
    for (std::size_t b = a + 1; b < m; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += (scores[i][a] - mu[a]) * (scores[i][b] - mu[b]);
      }
      const double r = s / (static_cast<double>(n - 1) * sd[a] * sd[b]);
      corr[a * m + b] = corr[b * m + a] = r;
    }
  }

  EmpiricalRouteLaw out;
  std::vector<double> chol;
  if (!cholesky(corr, m, chol)) {
    // Repair: clip eigenvalues at 1e-6 and rescale to unit diagonal.
    std::vector<double> work = corr, eigvals, vecs;
    jacobi_eigen(work, m, eigvals, vecs);
    for (double& e : eigvals) e = std::max(e, 1e-6);
    std::vector<double> repaired(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          s += vecs[a * m + k] * eigvals[k] * vecs[b * m + k];
        }
        repaired[a * m + b] = s;
      }
    }
    for (std::size_t a = 0; a < m; ++a) {
      const double da = std::sqrt(repaired[a * m + a]);
      for (std::size_t b = 0; b < m; ++b) {
        repaired[a * m + b] /= da * std::sqrt(repaired[b * m + b]);
      }
    }
    // Diagonal rescaling can reintroduce asymmetry at rounding level; resymmetrize.
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        const double v = 0.5 * (repaired[a * m + b] + repaired[b * m + a]);
        repaired[a * m + b] = repaired[b * m + a] = v;
      }
      repaired[a * m + a] = 1.0;
    }
    if (!cholesky(repaired, m, chol)) {
      throw NumericError("route_copula_mc: correlation repair failed");
    }
    out.correlation_repaired = true;
  }

  out.sorted_draws.reserve(n_draws);
  std::vector<double> z(m);
  for (std::size_t d = 0; d < n_draws; ++d) {
    for (std::size_t j = 0; j < m; ++j) z[j] = rng.normal();
    double route = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double zs = 0.0;
      for (std::size_t k = 0; k <= j; ++k) zs += chol[j * m + k] * z[k];
      const double u = std::clamp(normal_cdf(zs), 1e-12, 1.0 - 1e-12);
      route += gamma_quantile(marginals[j], u);
    }
    out.sorted_draws.push_back(route);
  }
  std::sort(out.sorted_draws.begin(), out.sorted_draws.end());
  return out;
}

double variance_underestimation_ratio(const std::vector<std::vector<double>>& segment_tt) {
  check_matrix(segment_tt, "variance_underestimation_ratio");
  const std::size_t m = segment_tt.front().size();
  std::vector<double> sums;
  sums.reserve(segment_tt.size());
  for (const auto& row : segment_tt) {
    sums.push_back(std::accumulate(row.begin(), row.end(), 0.0));
  }
  const double mu = sample_mean(sums);
  double route_var = 0.0;
  for (double s : sums) route_var += (s - mu) * (s - mu);
  route_var /= static_cast<double>(sums.size() - 1);

  double seg_var_sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = column(segment_tt, j);
    const double cmu = sample_mean(col);
    double v = 0.0;
    for (double x : col) v += (x - cmu) * (x - cmu);
    seg_var_sum += v / static_cast<double>(col.size() - 1);
  }
  return route_var / seg_var_sum;
}

}  // namespace dyngam

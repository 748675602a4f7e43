#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dyngam/distributions.hpp"
#include "dyngam/errors.hpp"
#include "dyngam/rng.hpp"
#include "dyngam/special_functions.hpp"
#include "support/quadrature.hpp"
#include "support/stats.hpp"

using namespace dyngam;

TEST_CASE("log_gamma_fn matches known values") {
  CHECK(std::fabs(log_gamma_fn(1.0)) < 1e-14);
  CHECK(log_gamma_fn(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-13));
  // Gamma(10) = 9! = 362880
  CHECK(log_gamma_fn(10.0) == doctest::Approx(12.80182748008147).epsilon(1e-13));
}

TEST_CASE("log_gamma_fn agrees with libm across the working range") {
  // std::lgamma is an independent implementation; relative gap <= 1e-13.
  for (double e = -6.0; e <= 6.0; e += 0.25) {
    const double x = std::pow(10.0, e);
    const double ours = log_gamma_fn(x);
    const double ref = std::lgamma(x);
    const double denom = std::max(1.0, std::fabs(ref));
    CHECK(std::fabs(ours - ref) / denom < 1e-13);
  }
}

TEST_CASE("log_gamma_fn rejects bad input") {
  CHECK_THROWS_AS(log_gamma_fn(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma_fn(-3.0), DomainError);
  CHECK_THROWS_AS(log_gamma_fn(std::nan("")), DomainError);
}

TEST_CASE("reg_inc_beta boundary and closed-form values") {
  CHECK(reg_inc_beta(2.3, 0.7, 0.0) == 0.0);
  CHECK(reg_inc_beta(2.3, 0.7, 1.0) == 1.0);
  CHECK(reg_inc_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-13));
  // symmetry point of Beta(a, a)
  CHECK(reg_inc_beta(2.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, -0.1), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.1), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(0.0, 1.0, 0.5), DomainError);
}

TEST_CASE("reg_inc_beta reflection identity over random parameters") {
  Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    const double a = std::exp(rng.uniform() * 12.0 - 6.0 + std::log(0.05) + 3.0);
    const double b = std::exp(rng.uniform() * 12.0 - 6.0 + std::log(0.05) + 3.0);
    const double x = rng.uniform();
    const double s = reg_inc_beta(a, b, x) + reg_inc_beta(b, a, 1.0 - x);
    CHECK(std::fabs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("reg_inc_beta agrees with direct quadrature") {
  const std::vector<std::array<double, 3>> cases = {
      {0.7, 3.2, 0.15}, {2.0, 5.0, 0.4}, {8.5, 0.9, 0.85}, {40.0, 60.0, 0.42}};
  for (const auto& [a, b, x] : cases) {
    const double lb = log_beta_fn(a, b);
    const double numer = testsupport::integrate(
        [&](double t) {
          if (t <= 0.0 || t >= 1.0) return 0.0;
          return std::exp((a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - lb);
        },
        0.0, x, 1e-13);
    CHECK(reg_inc_beta(a, b, x) == doctest::Approx(numer).epsilon(1e-9));
  }
}

TEST_CASE("f_cdf closed forms for F(2,2)") {
  const FLaw law(2.0, 2.0);
  CHECK(f_cdf(law, 0.0) == 0.0);
  CHECK(f_cdf(law, 1.0) == doctest::Approx(0.5).epsilon(1e-12));   // x/(1+x)
  CHECK(f_cdf(law, 3.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(f_cdf(law, 1e9) > 1.0 - 1e-8);
  CHECK_THROWS_AS(f_cdf(law, -0.5), DomainError);
}

TEST_CASE("f_cdf is monotone nondecreasing") {
  const FLaw law(3.7, 0.9);
  double prev = 0.0;
  for (double x = 0.01; x < 50.0; x *= 1.4) {
    const double c = f_cdf(law, x);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("f_quantile inverts f_cdf") {
  const FLaw f22(2.0, 2.0);
  CHECK(f_quantile(f22, 0.5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f_quantile(f22, 0.75) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK_THROWS_AS(f_quantile(f22, 0.0), DomainError);
  CHECK_THROWS_AS(f_quantile(f22, 1.0), DomainError);

  // Round trip across laws including the small-df corners the filter produces.
  const std::vector<FLaw> laws = {FLaw(2.0, 2.0), FLaw(2.0, 0.4), FLaw(26.6, 52.0),
                                  FLaw(0.3, 7.0), FLaw(200.0, 3.0)};
  for (const auto& law : laws) {
    double prev = 0.0;
    for (double q = 0.001; q < 0.9995; q += 0.037) {
      const double x = f_quantile(law, q);
      CHECK(x > prev);  // strictly increasing
      prev = x;
      CHECK(std::fabs(f_cdf(law, x) - q) < 1e-8);
    }
  }
}

TEST_CASE("gamma_logpdf and gamma_cdf closed forms") {
  const GammaLaw expo(1.0, 1.0);
  for (double x = 0.1; x < 6.0; x += 0.7) {
    CHECK(gamma_logpdf(expo, x) == doctest::Approx(-x).epsilon(1e-13));
  }
  const GammaLaw expo3(1.0, 3.0);
  for (double x = 0.1; x < 4.0; x += 0.5) {
    CHECK(gamma_cdf(expo3, x) == doctest::Approx(1.0 - std::exp(-3.0 * x)).epsilon(1e-12));
  }
  // Erlang(2): 1 - (1 + x) e^{-x}
  CHECK(gamma_cdf(GammaLaw(2.0, 1.0), 1.0) ==
        doctest::Approx(0.2642411176571154).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_logpdf(expo, 0.0), DomainError);
  CHECK_THROWS_AS(gamma_cdf(expo, -1.0), DomainError);
}

TEST_CASE("gamma density integrates to one") {
  const std::vector<GammaLaw> laws = {GammaLaw(0.3, 2.0), GammaLaw(1.0, 1.0),
                                      GammaLaw(5.0, 0.5), GammaLaw(40.0, 10.0)};
  for (const auto& law : laws) {
    const double hi = gamma_quantile(law, 1.0 - 1e-12);
    double mass;
    if (law.shape < 1.0) {
      // The density has an integrable singularity at 0; substitute u = x^shape
      // so the transformed integrand r^a/(a Gamma(a)) exp(-r u^(1/a)) is bounded.
      const double a = law.shape;
      const double front = std::exp(a * std::log(law.rate) - std::log(a) - log_gamma_fn(a));
      mass = testsupport::integrate(
          [&](double u) {
            return u <= 0.0 ? front : front * std::exp(-law.rate * std::pow(u, 1.0 / a));
          },
          0.0, std::pow(hi, a), 1e-12);
    } else {
      mass = testsupport::integrate(
          [&](double x) { return x <= 0.0 ? 0.0 : std::exp(gamma_logpdf(law, x)); }, 0.0,
          hi, 1e-12);
    }
    CHECK(std::fabs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("gamma_quantile inverts gamma_cdf") {
  const std::vector<GammaLaw> laws = {GammaLaw(0.2, 1.0), GammaLaw(1.0, 2.0),
                                      GammaLaw(13.3, 0.7), GammaLaw(300.0, 30.0)};
  for (const auto& law : laws) {
    for (double q = 0.001; q < 0.9995; q += 0.0415) {
      const double x = gamma_quantile(law, q);
      CHECK(std::fabs(gamma_cdf(law, x) - q) < 1e-9);
    }
  }
  CHECK_THROWS_AS(gamma_quantile(GammaLaw(1.0, 1.0), 0.0), DomainError);
}

TEST_CASE("gamma_sample long-run mean and tail") {
  Rng rng(42);
  const GammaLaw law(3.0, 2.0);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += gamma_sample(law, rng);
  const double se = std::sqrt(law.variance() / n);
  CHECK(std::fabs(sum / n - law.mean()) < 4.0 * se);

  // Exponential tail: P(X > 1) = e^{-1} for Gamma(1, 1).
  Rng rng2(43);
  const GammaLaw expo(1.0, 1.0);
  int over = 0;
  for (int i = 0; i < n; ++i) {
    if (gamma_sample(expo, rng2) > 1.0) ++over;
  }
  const double p = std::exp(-1.0);
  const double se_p = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::fabs(static_cast<double>(over) / n - p) < 4.0 * se_p);
}

TEST_CASE("gamma_sample shape below one uses the boost correctly") {
  Rng rng(7);
  const GammaLaw law(0.5, 1.0);
  const int n = 400000;
  std::vector<double> draws(n);
  for (auto& d : draws) d = gamma_sample(law, rng);
  const double gap =
      testsupport::sup_cdf_gap(draws, [&](double x) { return gamma_cdf(law, x); });
  CHECK(gap < 0.005);
}

TEST_CASE("samplers are deterministic given the seed") {
  Rng a(12345), b(12345);
  const GammaLaw law(2.7, 1.3);
  for (int i = 0; i < 50; ++i) {
    CHECK(gamma_sample(law, a) == gamma_sample(law, b));
  }
  Rng c(9), d(9);
  for (int i = 0; i < 50; ++i) {
    CHECK(beta_sample(0.7, 2.2, c) == beta_sample(0.7, 2.2, d));
  }
}

TEST_CASE("beta_sample uniform case and symmetric mean") {
  Rng rng(11);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = beta_sample(1.0, 1.0, rng);
  const double gap = testsupport::sup_cdf_gap(draws, [](double x) { return x; });
  CHECK(ks_asymptotic_p(gap, draws.size()) > 0.001);

  Rng rng2(12);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += beta_sample(2.0, 2.0, rng2);
  CHECK(std::fabs(sum / n - 0.5) < 4.0 * std::sqrt(0.05 / n));
}

TEST_CASE("beta_sample matches the gamma-ratio construction in distribution") {
  // Two independent routes to the same law: Cheng rejection vs X/(X+Y).
  const std::vector<std::pair<double, double>> cases = {
      {0.5, 0.5}, {2.0, 5.0}, {0.3, 3.0}, {4.0, 4.0}, {1.5, 0.4}, {30.0, 45.0}};
  int idx = 0;
  for (const auto& [a, b] : cases) {
    Rng r1(1000 + idx);
    Rng r2(2000 + idx);
    ++idx;
    const int n = 40000;
    std::vector<double> direct(n), ratio(n);
    for (int i = 0; i < n; ++i) direct[i] = beta_sample(a, b, r1);
    const GammaLaw la(a, 1.0);
    const GammaLaw lb(b, 1.0);
    for (int i = 0; i < n; ++i) {
      const double x = gamma_sample(la, r2);
      const double y = gamma_sample(lb, r2);
      ratio[i] = x / (x + y);
    }
    const auto ks = testsupport::two_sample_ks(direct, ratio);
    INFO("a=", a, " b=", b, " D=", ks.d);
    CHECK(ks.p > 0.001);
  }
}

TEST_CASE("normal_quantile round trip and reference value") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p = 0.0005; p < 0.9999; p += 0.0173) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("log_normal_cdf stays finite deep in the tail") {
  CHECK(log_normal_cdf(-1.0) == doctest::Approx(std::log(normal_cdf(-1.0))).epsilon(1e-10));
  CHECK(std::isfinite(log_normal_cdf(-40.0)));
  CHECK(log_normal_cdf(-40.0) < -700.0);
}

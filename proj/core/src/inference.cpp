#include "dyngam/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dyngam/errors.hpp"
#include "dyngam/parallel.hpp"
#include "dyngam/route.hpp"
#include "dyngam/special_functions.hpp"

namespace dyngam {

namespace {

struct ForwardPass {
  std::vector<double> a;      // posterior shapes a_t
  std::vector<double> b;      // posterior rates b_t
  std::vector<double> wsum;   // e^{beta.u} sum_j lambda_j y_jt per step
};

ForwardPass forward_filter(const ObservationSeries& series, const HyperParams& hyper,
                           const CorridorModel& model, const GammaState& init) {
  const std::size_t T = series.size();
  const double gamma = hyper.gamma_discount;
  const double m_alpha = static_cast<double>(model.size()) * hyper.alpha;
  ForwardPass fp;
  fp.a.resize(T);
  fp.b.resize(T);
  fp.wsum.resize(T);
  double a = init.a;
  double b = init.b;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& obs = series[t];
    if (obs.y.size() != model.size()) {
      throw ShapeError("forward filter: observation at t=" + std::to_string(obs.t) +
                       " has wrong segment count");
    }
    const double s = covariate_scale(hyper, obs.u);
    double w = 0.0;
    for (std::size_t j = 0; j < obs.y.size(); ++j) {
      w += model.lambdas()[j] * obs.y[j];
    }
    fp.wsum[t] = s * w;
    a = gamma * a + m_alpha;
    b = gamma * b + fp.wsum[t];
    fp.a[t] = a;
    fp.b[t] = b;
  }
  return fp;
}

double beta_logpdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

LambdaPrior::LambdaPrior(std::vector<double> r0_in, std::vector<double> q0_in)
    : r0(std::move(r0_in)), q0(std::move(q0_in)) {
  if (r0.empty() || r0.size() != q0.size()) {
    throw ShapeError("LambdaPrior: r0 and q0 must be nonempty and equally sized");
  }
  for (std::size_t j = 0; j < r0.size(); ++j) {
    if (!(r0[j] > 0.0) || !(q0[j] > 0.0)) {
      throw DomainError("LambdaPrior: parameters must be positive");
    }
  }
}

LambdaPrior LambdaPrior::flat(std::size_t m, double r, double q) {
  return LambdaPrior(std::vector<double>(m, r), std::vector<double>(m, q));
}

std::vector<double> ffbs_sample(const ObservationSeries& series, const HyperParams& hyper,
                                const CorridorModel& model, const GammaState& init,
                                Rng& rng) {
  if (series.empty()) throw DataError("ffbs_sample: empty series");
  const ForwardPass fp = forward_filter(series, hyper, model, init);
  const std::size_t T = series.size();
  const double gamma = hyper.gamma_discount;
  std::vector<double> eta(T);
  eta[T - 1] = gamma_sample(GammaLaw(fp.a[T - 1], fp.b[T - 1]), rng);
  for (std::size_t i = T - 1; i-- > 0;) {
    const double z = gamma_sample(GammaLaw((1.0 - gamma) * fp.a[i], fp.b[i]), rng);
    eta[i] = gamma * eta[i + 1] + z;
  }
  for (double e : eta) {
    if (!std::isfinite(e) || e <= 0.0) {
      throw NumericError("ffbs_sample: degenerate environment draw");
    }
  }
  return eta;
}

std::vector<double> sample_lambda_conditional(const std::vector<double>& eta_path,
                                              const ObservationSeries& series,
                                              const HyperParams& hyper,
                                              const LambdaPrior& prior, Rng& rng) {
  if (eta_path.size() != series.size()) {
    throw ShapeError("sample_lambda_conditional: eta path length " +
                     std::to_string(eta_path.size()) + " does not match series length " +
                     std::to_string(series.size()));
  }
  const std::size_t m = prior.r0.size();
  const double T_alpha = static_cast<double>(series.size()) * hyper.alpha;
  std::vector<double> rate(prior.q0);
  for (std::size_t t = 0; t < series.size(); ++t) {
    const auto& obs = series[t];
    if (obs.y.size() != m) {
      throw ShapeError("sample_lambda_conditional: ragged observation at t=" +
                       std::to_string(obs.t));
    }
    const double s = covariate_scale(hyper, obs.u);
    for (std::size_t j = 0; j < m; ++j) {
      rate[j] += eta_path[t] * obs.y[j] * s;
    }
  }
  std::vector<double> lambdas(m);
  for (std::size_t j = 0; j < m; ++j) {
    lambdas[j] = gamma_sample(GammaLaw(prior.r0[j] + T_alpha, rate[j]), rng);
  }
  return lambdas;
}

std::vector<double> draw_lambdas(std::vector<double>& eta_path, const ObservationSeries& series,
                                 const HyperParams& hyper, const LambdaPrior& prior,
                                 Rng& rng) {
  std::vector<double> lambdas = sample_lambda_conditional(eta_path, series, hyper, prior, rng);
  // Unit-mean gauge: the likelihood only sees lambda_j * eta_t, so rescaling
  // both keeps it fixed while pinning the unidentified scale.
  const double g = mean_of(lambdas);
  for (double& l : lambdas) l /= g;
  for (double& e : eta_path) e *= g;
  return lambdas;
}

double gamma_marginal_loglik(const ObservationSeries& series, double alpha, double gamma,
                             const std::vector<double>& beta, const CorridorModel& model,
                             const GammaState& init) {
  const HyperParams hyper(alpha, gamma, beta);
  double sum = 0.0;
  GammaState state = init;
  for (const auto& obs : series) {
    const GammaState prior = evolve_state(state, hyper);
    sum += joint_predictive_logpdf(prior, hyper, model, obs.y, obs.u);
    state = update_state_mv(prior, hyper, model, obs);
  }
  return sum;
}

MetropolisGammaResult metropolis_gamma(double current_gamma, const ObservationSeries& series,
                                       double alpha, const std::vector<double>& beta,
                                       const CorridorModel& model, const GammaState& init,
                                       const std::function<double(double)>& log_prior,
                                       double proposal_conc, Rng& rng) {
  if (!(current_gamma > 0.0 && current_gamma < 1.0)) {
    throw DomainError("metropolis_gamma: current value must lie in (0, 1)");
  }
  if (!(proposal_conc > 0.0)) {
    throw ConfigError("metropolis_gamma: proposal concentration must be positive");
  }
  const double proposal =
      beta_sample(proposal_conc * current_gamma, proposal_conc * (1.0 - current_gamma), rng);
  if (!(proposal > 0.0 && proposal < 1.0)) {
    return {current_gamma, false};  // boundary proposals auto-rejected
  }
  const auto prior_term = [&](double g) { return log_prior ? log_prior(g) : 0.0; };
  const double target_cur =
      gamma_marginal_loglik(series, alpha, current_gamma, beta, model, init) +
      prior_term(current_gamma);
  const double target_prop =
      gamma_marginal_loglik(series, alpha, proposal, beta, model, init) +
      prior_term(proposal);
  // Asymmetric proposal correction.
  const double fwd = beta_logpdf(proposal, proposal_conc * current_gamma,
                                 proposal_conc * (1.0 - current_gamma));
  const double rev = beta_logpdf(current_gamma, proposal_conc * proposal,
                                 proposal_conc * (1.0 - proposal));
  const double log_ratio = target_prop - target_cur + rev - fwd;
  if (std::log(rng.uniform()) < log_ratio) return {proposal, true};
  return {current_gamma, false};
}

GibbsResult run_gibbs(const ObservationSeries& series, const HyperParams& hyper,
                      const CorridorModel& model, const LambdaPrior& prior,
                      const GibbsConfig& config) {
  if (series.empty()) throw DataError("run_gibbs: empty series");
  if (config.chains < 1 || config.iters < 1 || config.burn_in < 0 ||
      config.burn_in >= config.iters || config.thin < 1) {
    throw ConfigError("run_gibbs: invalid MCMC configuration");
  }
  const std::size_t m = model.size();
  if (prior.r0.size() != m) throw ShapeError("run_gibbs: prior size mismatch");
  const std::size_t T = series.size();

  const GammaState init =
      config.init ? *config.init : default_init_state_mv(series, hyper, model);

  // Constant pieces of the complete-data log likelihood.
  double sum_log_y = 0.0;
  std::vector<double> log_scale(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (double v : series[t].y) sum_log_y += std::log(v);
    log_scale[t] = std::log(covariate_scale(hyper, series[t].u));
  }
  const double lgam_alpha = log_gamma_fn(hyper.alpha);

  const auto complete_data_log_joint = [&](const std::vector<double>& lambdas,
                                           const std::vector<double>& eta) {
    double sum_log_lambda = 0.0;
    for (double l : lambdas) sum_log_lambda += std::log(l);
    double sum_log_eta = 0.0;
    double quad = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sum_log_eta += std::log(eta[t]) + log_scale[t];
      double w = 0.0;
      for (std::size_t j = 0; j < m; ++j) w += lambdas[j] * series[t].y[j];
      quad += eta[t] * std::exp(log_scale[t]) * w;
    }
    double lj = hyper.alpha * (static_cast<double>(T) * sum_log_lambda +
                               static_cast<double>(m) * sum_log_eta) +
                (hyper.alpha - 1.0) * sum_log_y - quad -
                static_cast<double>(T * m) * lgam_alpha;
    for (std::size_t j = 0; j < m; ++j) {
      lj += gamma_logpdf(GammaLaw(prior.r0[j], prior.q0[j]), lambdas[j]);
    }
    return lj;
  };

  GibbsResult result;
  result.chains.resize(config.chains);
  std::vector<std::vector<double>> eta_sums(config.chains, std::vector<double>(T, 0.0));

  parallel_for(static_cast<std::size_t>(config.chains), config.jobs, [&](std::size_t c) {
    Rng rng(derive_seed(config.seed, c));
    // Overdispersed start: prior draws for the rates, unit-mean normalized.
    std::vector<double> lambdas(m);
    for (std::size_t j = 0; j < m; ++j) {
      lambdas[j] = gamma_sample(GammaLaw(prior.r0[j], prior.q0[j]), rng);
    }
    const double g0 = mean_of(lambdas);
    for (double& l : lambdas) l /= g0;

    auto& draws = result.chains[c];
    draws.reserve((config.iters - config.burn_in) / config.thin + 1);
    for (int it = 1; it <= config.iters; ++it) {
      const CorridorModel current(lambdas, {}, model.segment_ids());
      std::vector<double> eta = ffbs_sample(series, hyper, current, init, rng);
      lambdas = draw_lambdas(eta, series, hyper, prior, rng);
      if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) {
        GibbsDraw d;
        d.lambdas = lambdas;
        d.log_joint = complete_data_log_joint(lambdas, eta);
        if (!std::isfinite(d.log_joint)) {
          throw NumericError("run_gibbs: non-finite log joint at iteration " +
                             std::to_string(it) + " (chain " + std::to_string(c) + ")");
        }
        for (std::size_t t = 0; t < T; ++t) eta_sums[c][t] += eta[t];
        if (config.keep_eta) d.eta_path = eta;
        draws.push_back(std::move(d));
      }
    }
  });

  // Posterior mean environment path across all retained draws.
  std::size_t total_draws = 0;
  for (const auto& ch : result.chains) total_draws += ch.size();
  result.eta_mean.assign(T, 0.0);
  for (int c = 0; c < config.chains; ++c) {
    for (std::size_t t = 0; t < T; ++t) result.eta_mean[t] += eta_sums[c][t];
  }
  for (double& v : result.eta_mean) v /= static_cast<double>(total_draws);

  // Per-segment diagnostics and summaries.
  result.lambda_summary.resize(m);
  result.max_rhat = 0.0;
  result.min_ess = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::vector<double>> traces(config.chains);
    std::vector<double> pooled;
    pooled.reserve(total_draws);
    for (int c = 0; c < config.chains; ++c) {
      traces[c].reserve(result.chains[c].size());
      for (const auto& d : result.chains[c]) {
        traces[c].push_back(d.lambdas[j]);
        pooled.push_back(d.lambdas[j]);
      }
    }
    LambdaSummary& s = result.lambda_summary[j];
    s.segment_id = model.segment_ids()[j];
    s.mean = mean_of(pooled);
    double var = 0.0;
    for (double v : pooled) var += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(var / static_cast<double>(pooled.size() - 1));
    s.ci_low = empirical_quantile(pooled, 0.025);
    s.ci_high = empirical_quantile(pooled, 0.975);
    s.rhat = split_rhat(traces);
    s.ess = effective_sample_size(traces);
    result.max_rhat = std::max(result.max_rhat, s.rhat);
    result.min_ess = std::min(result.min_ess, s.ess);
  }
  return result;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& ch : chains) {
    const std::size_t half = ch.size() / 2;
    if (half < 2) continue;
    halves.emplace_back(ch.begin(), ch.begin() + half);
    halves.emplace_back(ch.end() - half, ch.end());
  }
  if (halves.size() < 2) return 1.0;
  const double n = static_cast<double>(halves.front().size());
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    const double mu = mean_of(h);
    double v = 0.0;
    for (double x : h) v += (x - mu) * (x - mu);
    means.push_back(mu);
    vars.push_back(v / (n - 1.0));
  }
  const double w = mean_of(vars);
  if (!(w > 1e-300)) return 1.0;  // constant chains, by convention
  const double grand = mean_of(means);
  double vm = 0.0;
  for (double mu : means) vm += (mu - grand) * (mu - grand);
  vm /= static_cast<double>(means.size() - 1);
  const double var_plus = (n - 1.0) / n * w + vm;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  if (chains.empty() || chains.front().size() < 4) return 0.0;
  const std::size_t n = chains.front().size();
  const std::size_t m = chains.size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    if (chains[c].size() != n) throw ShapeError("effective_sample_size: ragged chains");
    means[c] = mean_of(chains[c]);
    double v = 0.0;
    for (double x : chains[c]) v += (x - means[c]) * (x - means[c]);
    vars[c] = v / static_cast<double>(n - 1);
  }
  const double w = mean_of(vars);
  if (!(w > 1e-300)) return static_cast<double>(n * m);  // constant chains
  double vm = 0.0;
  if (m > 1) {
    const double grand = mean_of(means);
    for (double mu : means) vm += (mu - grand) * (mu - grand);
    vm /= static_cast<double>(m - 1);
  }
  const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + vm;

  // Mean autocovariance across chains at lag t (biased normalization).
  const auto acov = [&](std::size_t lag) {
    double sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) {
        s += (chains[c][i] - means[c]) * (chains[c][i + lag] - means[c]);
      }
      sum += s / static_cast<double>(n);
    }
    return sum / static_cast<double>(m);
  };

  // Geyer initial monotone positive sequence over paired autocorrelations.
  double prev_pair = std::numeric_limits<double>::infinity();
  double pair_sum = 0.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double rho_even = 1.0 - (w - acov(lag)) / var_plus;
    const double rho_odd = 1.0 - (w - acov(lag + 1)) / var_plus;
    double pair = rho_even + rho_odd;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    pair_sum += pair;
    if (lag > 2000) break;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum, 1e-3);
  return static_cast<double>(n * m) / tau;
}

ParticleSet init_particles(std::size_t n, const GammaState& init, const CorridorModel& model,
                           const LambdaPrior& prior, const ParticleConfig& config, Rng& rng) {
  if (n == 0) throw ConfigError("init_particles: need at least one particle");
  ParticleSet ps;
  ps.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Particle p{1.0, init, {}, {}, {}};
    p.eta = init.a / init.b;
    if (config.fixed_lambda) {
      p.lambda = model.lambdas();
    } else {
      p.lambda.resize(model.size());
      for (std::size_t j = 0; j < model.size(); ++j) {
        p.lambda[j] = gamma_sample(GammaLaw(prior.r0[j], prior.q0[j]), rng);
      }
      p.r = prior.r0;
      p.q = prior.q0;
    }
    ps.particles.push_back(std::move(p));
  }
  ps.weights.assign(n, 1.0 / static_cast<double>(n));
  ps.ess = static_cast<double>(n);
  return ps;
}

ParticleStepResult particle_step(const ParticleSet& ps, const HyperParams& hyper,
                                 const ObservationRecord& obs, const ParticleConfig& config,
                                 Rng& rng) {
  const std::size_t n = ps.particles.size();
  if (n == 0) throw ConfigError("particle_step: empty particle set");
  const std::size_t m = ps.particles.front().lambda.size();
  if (obs.y.size() != m) {
    throw ShapeError("particle_step: observation has " + std::to_string(obs.y.size()) +
                     " segments, particles carry " + std::to_string(m));
  }
  for (double v : obs.y) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw DataError("particle_step: nonpositive travel time at t=" + std::to_string(obs.t));
    }
  }
  const double gamma = hyper.gamma_discount;
  const double s = covariate_scale(hyper, obs.u);
  const double lgam_alpha = log_gamma_fn(hyper.alpha);

  ParticleStepResult out;
  out.set.particles = ps.particles;
  auto& parts = out.set.particles;

  // Refresh rates from their sufficient statistics, then propagate the
  // environment from each particle's evolved state.
  double pred_mean = 0.0;
  std::vector<double> log_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    Particle& p = parts[i];
    if (!config.fixed_lambda) {
      for (std::size_t j = 0; j < m; ++j) {
        p.lambda[j] = gamma_sample(GammaLaw(p.r[j], p.q[j]), rng);
      }
    }
    p.eta = gamma_sample(GammaLaw(gamma * p.state.a, gamma * p.state.b), rng);

    double inv_sum = 0.0;
    double loglik = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double rate = p.lambda[j] * p.eta * s;
      inv_sum += 1.0 / rate;
      loglik += hyper.alpha * std::log(rate) + (hyper.alpha - 1.0) * std::log(obs.y[j]) -
                rate * obs.y[j] - lgam_alpha;
    }
    pred_mean += ps.weights[i] * hyper.alpha * inv_sum;
    log_w[i] = std::log(ps.weights[i]) + loglik;
  }
  out.predicted_route_mean = pred_mean;

  const double max_lw = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(max_lw)) {
    throw NumericError("particle_step: total likelihood underflow at t=" +
                       std::to_string(obs.t) + " (max log-weight=" +
                       std::to_string(max_lw) + ")");
  }
  double sum_exp = 0.0;
  for (double& lw : log_w) {
    lw = std::exp(lw - max_lw);
    sum_exp += lw;
  }
  out.log_evidence_inc = max_lw + std::log(sum_exp);

  auto& weights = out.set.weights;
  weights.resize(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = log_w[i] / sum_exp;
    sq += weights[i] * weights[i];
  }
  out.set.ess = 1.0 / sq;

  if (out.set.ess < config.ess_threshold * static_cast<double>(n)) {
    // Multinomial resampling.
    std::vector<double> cum(n);
    std::partial_sum(weights.begin(), weights.end(), cum.begin());
    std::vector<Particle> resampled;
    resampled.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform() * cum.back();
      const auto it = std::lower_bound(cum.begin(), cum.end(), u);
      resampled.push_back(parts[static_cast<std::size_t>(it - cum.begin())]);
    }
    parts = std::move(resampled);
    weights.assign(n, 1.0 / static_cast<double>(n));
    out.set.ess = static_cast<double>(n);
    out.resampled = true;
  }

  // Conjugate state and sufficient-statistic updates.
  const double m_alpha = static_cast<double>(m) * hyper.alpha;
  for (auto& p : parts) {
    double w = 0.0;
    for (std::size_t j = 0; j < m; ++j) w += p.lambda[j] * obs.y[j];
    p.state = GammaState(gamma * p.state.a + m_alpha, gamma * p.state.b + s * w);
    if (!config.fixed_lambda) {
      for (std::size_t j = 0; j < m; ++j) {
        p.r[j] += hyper.alpha;
        p.q[j] += p.eta * obs.y[j] * s;
      }
    }
  }
  return out;
}

}  // namespace dyngam

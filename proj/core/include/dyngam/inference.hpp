#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dyngam/corridor.hpp"
#include "dyngam/rng.hpp"

namespace dyngam {

/// Independent Gamma priors for the segment rates: lambda_j ~ Gamma(r0_j, q0_j).
struct LambdaPrior {
  std::vector<double> r0;
  std::vector<double> q0;

  LambdaPrior(std::vector<double> r0_in, std::vector<double> q0_in);
  static LambdaPrior flat(std::size_t m, double r = 1.0, double q = 1.0);
};

/// Joint smoothing draw of the environment path: forward filter for
/// (a_t, b_t), then eta_T ~ Gamma(a_T, b_T) and, stepping backward,
/// z_t ~ Gamma((1-gamma) a_t, b_t) with eta_t = gamma eta_{t+1} + z_t.
std::vector<double> ffbs_sample(const ObservationSeries& series, const HyperParams& hyper,
                                const CorridorModel& model, const GammaState& init,
                                Rng& rng);

/// Raw conditional draw lambda_j ~ Gamma(r0_j + T alpha, q0_j + sum_t eta_t y_jt e^{beta.u}).
std::vector<double> sample_lambda_conditional(const std::vector<double>& eta_path,
                                              const ObservationSeries& series,
                                              const HyperParams& hyper,
                                              const LambdaPrior& prior, Rng& rng);

/// Conditional draw followed by the unit-mean gauge fix: lambda is rescaled to
/// mean one and eta_path multiplied by the same factor, keeping every product
/// lambda_j * eta_t unchanged.
std::vector<double> draw_lambdas(std::vector<double>& eta_path, const ObservationSeries& series,
                                 const HyperParams& hyper, const LambdaPrior& prior, Rng& rng);

/// Marginal log likelihood of the discount factor: sum of one-step joint
/// predictive log densities from the forward filter (environment integrated
/// out), plus nothing else. Used as the Metropolis target for gamma.
double gamma_marginal_loglik(const ObservationSeries& series, double alpha, double gamma,
                             const std::vector<double>& beta, const CorridorModel& model,
                             const GammaState& init);

struct MetropolisGammaResult {
  double gamma = 0.0;
  bool accepted = false;
};

/// One Metropolis-Hastings move for the discount factor with a Beta proposal
/// centered at the current value (concentration `proposal_conc`). Proposals
/// that land on the boundary of (0,1) are rejected outright.
MetropolisGammaResult metropolis_gamma(double current_gamma, const ObservationSeries& series,
                                       double alpha, const std::vector<double>& beta,
                                       const CorridorModel& model, const GammaState& init,
                                       const std::function<double(double)>& log_prior,
                                       double proposal_conc, Rng& rng);

struct GibbsDraw {
  std::vector<double> eta_path;
  std::vector<double> lambdas;
  double log_joint = 0.0;  // complete-data log likelihood + lambda prior density
};

struct GibbsConfig {
  int chains = 4;
  int iters = 10000;
  int burn_in = 2000;
  int thin = 2;
  std::uint64_t seed = 20190102;
  int jobs = 1;
  bool keep_eta = false;               // retain eta paths in draws (memory-heavy)
  std::optional<GammaState> init;      // environment prior; default rule when unset
};

struct LambdaSummary {
  std::string segment_id;
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;   // 2.5%
  double ci_high = 0.0;  // 97.5%
  double rhat = 1.0;
  double ess = 0.0;
};

struct GibbsResult {
  std::vector<std::vector<GibbsDraw>> chains;     // [chain][draw]
  std::vector<LambdaSummary> lambda_summary;      // one per segment
  std::vector<double> eta_mean;                   // posterior mean path
  double max_rhat = 1.0;
  double min_ess = 0.0;
};

/// Conditional Gibbs sampler for fixed (alpha, gamma): alternates the FFBS
/// draw of the environment path with conjugate draws of the segment rates.
GibbsResult run_gibbs(const ObservationSeries& series, const HyperParams& hyper,
                      const CorridorModel& model, const LambdaPrior& prior,
                      const GibbsConfig& config);

/// Split-chain potential scale reduction factor. Degenerate constant chains
/// return 1.0 by convention.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size (autocorrelation sum truncated by
/// Geyer's initial monotone positive sequence).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

struct Particle {
  double eta = 1.0;          // current environment draw
  GammaState state;          // conjugate (a, b) given this particle's rates
  std::vector<double> lambda;
  std::vector<double> r;     // lambda sufficient statistics (empty when rates fixed)
  std::vector<double> q;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::vector<double> weights;  // normalized
  double ess = 0.0;
};

struct ParticleConfig {
  double ess_threshold = 0.5;  // resample when ESS < threshold * N
  bool fixed_lambda = false;   // skip rate learning; lambda stays at its initial value
};

/// Particles seeded at the prior: known rates (fixed_lambda) or prior draws
/// with sufficient statistics initialized from the rate prior.
ParticleSet init_particles(std::size_t n, const GammaState& init, const CorridorModel& model,
                           const LambdaPrior& prior, const ParticleConfig& config, Rng& rng);

struct ParticleStepResult {
  ParticleSet set;
  double predicted_route_mean = 0.0;  // MC estimate before seeing the observation
  double log_evidence_inc = 0.0;      // log p(y_t | D^{t-1}) estimate
  bool resampled = false;
};

/// One sequential step: propagate each particle's environment from its evolved
/// state, weight by the observation likelihood, resample below the ESS
/// threshold (multinomial), then update the conjugate state and the rate
/// sufficient statistics. Log-space weights with max-shift normalization.
ParticleStepResult particle_step(const ParticleSet& ps, const HyperParams& hyper,
                                 const ObservationRecord& obs, const ParticleConfig& config,
                                 Rng& rng);

}  // namespace dyngam

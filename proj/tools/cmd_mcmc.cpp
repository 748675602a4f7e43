#include <fstream>

#include "commands.hpp"
#include "common.hpp"
#include "dyngam/errors.hpp"
#include "dyngam/inference.hpp"

namespace dyngam::cli {

namespace {

CorridorModel gibbs_corridor(const std::string& corridor_path, const ObservationsFile& obs) {
  if (!corridor_path.empty()) {
    std::ifstream in(corridor_path);
    if (!in) throw DataError("cannot open corridor file: " + corridor_path);
    nlohmann::json j;
    in >> j;
    return CorridorModel(j.at("lambdas").get<std::vector<double>>(), {},
                         j.contains("segment_ids")
                             ? j.at("segment_ids").get<std::vector<std::string>>()
                             : std::vector<std::string>{});
  }
  const CorridorModel calibrated = calibrate_lambdas(obs.observations);
  return CorridorModel(calibrated.lambdas(), {}, obs.segment_ids);
}

}  // namespace

void run_gibbs_cmd(const GibbsOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  if (obs.observations.empty()) throw DataError("empty observation series");
  const CorridorModel model = gibbs_corridor(opt.corridor_path, obs);
  const HyperParams hyper(opt.alpha, opt.gamma);
  const LambdaPrior prior = LambdaPrior::flat(model.size(), opt.prior_r0, opt.prior_q0);

  GibbsConfig config;
  config.chains = opt.chains;
  config.iters = opt.iters;
  config.burn_in = opt.mcmc_burn_in;
  config.thin = opt.thin;
  config.seed = opt.seed;
  config.jobs = opt.jobs;
  if (opt.init_a > 0.0 && opt.init_b > 0.0) {
    config.init = GammaState(opt.init_a, opt.init_b);
  } else if (opt.init_a > 0.0 || opt.init_b > 0.0) {
    throw ConfigError("--init-a and --init-b must be given together");
  }
  const GibbsResult result = run_gibbs(obs.observations, hyper, model, prior, config);

  std::ofstream draws(opt.out_dir + "/draws.csv");
  if (!draws) throw DataError("cannot write draws.csv");
  draws << "chain,iter";
  for (const auto& id : model.segment_ids()) draws << ",lambda_" << id;
  draws << "\n";
  for (std::size_t c = 0; c < result.chains.size(); ++c) {
    for (std::size_t i = 0; i < result.chains[c].size(); ++i) {
      draws << c << ',' << i;
      for (double l : result.chains[c][i].lambdas) draws << ',' << fmt(l);
      draws << "\n";
    }
  }

  std::ofstream eta(opt.out_dir + "/eta_mean.csv");
  if (!eta) throw DataError("cannot write eta_mean.csv");
  eta << "t,eta_mean\n";
  for (std::size_t t = 0; t < result.eta_mean.size(); ++t) {
    eta << t << ',' << fmt(result.eta_mean[t]) << "\n";
  }

  nlohmann::json summary;
  summary["retained_draws"] =
      result.chains.size() * (result.chains.empty() ? 0 : result.chains[0].size());
  summary["max_split_rhat"] = result.max_rhat;
  summary["min_ess"] = result.min_ess;
  nlohmann::json lams = nlohmann::json::array();
  for (const auto& s : result.lambda_summary) {
    nlohmann::json row;
    row["segment_id"] = s.segment_id;
    row["post_mean"] = s.mean;
    row["post_sd"] = s.sd;
    row["ci_low"] = s.ci_low;
    row["ci_high"] = s.ci_high;
    row["split_rhat"] = s.rhat;
    row["ess"] = s.ess;
    lams.push_back(row);
  }
  summary["lambda"] = lams;
  write_json(opt.out_dir + "/summary.json", summary);

  std::vector<std::string> inputs = {opt.observations_path};
  if (!opt.corridor_path.empty()) inputs.push_back(opt.corridor_path);
  nlohmann::json params;
  params["alpha"] = opt.alpha;
  params["gamma"] = opt.gamma;
  params["chains"] = opt.chains;
  params["iters"] = opt.iters;
  params["mcmc_burn_in"] = opt.mcmc_burn_in;
  params["thin"] = opt.thin;
  params["prior_r0"] = opt.prior_r0;
  params["prior_q0"] = opt.prior_q0;
  params["seed"] = opt.seed;
  write_meta(opt.out_dir, "gibbs", inputs, params);
}

void run_pf(const PfOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  if (obs.observations.empty()) throw DataError("empty observation series");
  const CorridorModel model = gibbs_corridor(opt.corridor_path, obs);
  const HyperParams hyper(opt.alpha, opt.gamma);
  const LambdaPrior prior = LambdaPrior::flat(model.size(), opt.prior_r0, opt.prior_q0);
  if (opt.particles < 1) throw ConfigError("pf: need at least one particle");

  ParticleConfig config;
  config.ess_threshold = opt.ess_threshold;
  config.fixed_lambda = opt.fixed_lambda;

  Rng rng(opt.seed);
  GammaState init = default_init_state_mv(obs.observations, hyper, model);
  if (opt.init_a > 0.0 && opt.init_b > 0.0) {
    init = GammaState(opt.init_a, opt.init_b);
  } else if (opt.init_a > 0.0 || opt.init_b > 0.0) {
    throw ConfigError("--init-a and --init-b must be given together");
  }
  ParticleSet ps = init_particles(static_cast<std::size_t>(opt.particles), init, model,
                                  prior, config, rng);

  std::ofstream csv(opt.out_dir + "/pf.csv");
  if (!csv) throw DataError("cannot write pf.csv");
  csv << "t,predicted_route_mean,log_evidence_inc,ess,resampled\n";
  double log_evidence = 0.0;
  for (std::size_t t = 0; t < obs.observations.size(); ++t) {
    const ParticleStepResult step =
        particle_step(ps, hyper, obs.observations[t], config, rng);
    log_evidence += step.log_evidence_inc;
    csv << t << ',' << fmt(step.predicted_route_mean) << ','
        << fmt(step.log_evidence_inc) << ',' << fmt(step.set.ess) << ','
        << (step.resampled ? 1 : 0) << "\n";
    ps = step.set;
  }

  nlohmann::json report;
  report["log_evidence"] = log_evidence;
  report["particles"] = opt.particles;
  report["ess_threshold"] = opt.ess_threshold;
  report["fixed_lambda"] = opt.fixed_lambda;
  if (!opt.fixed_lambda) {
    std::vector<double> post_mean(model.size(), 0.0);
    for (std::size_t i = 0; i < ps.particles.size(); ++i) {
      for (std::size_t j = 0; j < model.size(); ++j) {
        post_mean[j] += ps.weights[i] * ps.particles[i].r[j] / ps.particles[i].q[j];
      }
    }
    report["lambda_post_mean"] = post_mean;
  }
  write_json(opt.out_dir + "/report.json", report);

  std::vector<std::string> inputs = {opt.observations_path};
  if (!opt.corridor_path.empty()) inputs.push_back(opt.corridor_path);
  nlohmann::json params;
  params["alpha"] = opt.alpha;
  params["gamma"] = opt.gamma;
  params["particles"] = opt.particles;
  params["ess_threshold"] = opt.ess_threshold;
  params["fixed_lambda"] = opt.fixed_lambda;
  params["seed"] = opt.seed;
  write_meta(opt.out_dir, "pf", inputs, params);
}

}  // namespace dyngam::cli

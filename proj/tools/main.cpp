#include <exception>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "dyngam/errors.hpp"
#include "dyngam/parallel.hpp"

namespace {

using namespace dyngam;
using namespace dyngam::cli;

void emit_error(const char* kind, const std::string& message) {
  nlohmann::json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic Gamma corridor model: filtering, route reliability, "
               "inference, and baselines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  IngestOptions ingest;
  auto* cmd_ingest = app.add_subcommand("ingest", "Build travel times from sensor CSVs");
  cmd_ingest->add_option("--sensors", ingest.sensors_path, "sensors.csv path")->required();
  cmd_ingest->add_option("--speeds", ingest.speeds_path, "speeds.csv path")->required();
  cmd_ingest->add_option("--distances", ingest.distances_path,
                         "distances.csv override (sensor_id,distance_mi)");
  cmd_ingest->add_option("--weekday", ingest.weekday, "weekday filter (wed or 0..6)");
  cmd_ingest->add_option("--hours", ingest.hours, "inclusive hour window, e.g. 14-20");
  cmd_ingest->add_option("--year", ingest.year, "year filter");
  cmd_ingest->add_option("--merge-below", ingest.merge_below,
                         "drop co-located sensors closer than this many miles");
  cmd_ingest->add_option("--out-dir", ingest.out_dir, "output directory");

  SimulateOptions sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Draw a synthetic corridor series");
  cmd_sim->add_option("--alpha", sim.alpha, "per-segment shape");
  cmd_sim->add_option("--gamma", sim.gamma, "discount factor in (0,1)");
  cmd_sim->add_option("--m", sim.m, "number of segments (unit rates)");
  cmd_sim->add_option("--lambdas", sim.lambdas, "explicit segment rates")->delimiter(',');
  cmd_sim->add_option("--T", sim.T, "number of periods");
  cmd_sim->add_option("--a0", sim.a0, "initial environment shape");
  cmd_sim->add_option("--b0", sim.b0, "initial environment rate");
  cmd_sim->add_option("--seed", sim.seed, "random seed");
  cmd_sim->add_option("--out-dir", sim.out_dir, "output directory");

  FilterOptions filt;
  auto* cmd_filter = app.add_subcommand("filter", "Run the conjugate filter and "
                                                  "emit route reliability series");
  cmd_filter->add_option("--observations", filt.observations_path, "observations.csv")
      ->required();
  cmd_filter->add_option("--corridor", filt.corridor_path, "corridor.json (segment rates)");
  cmd_filter->add_option("--mode", filt.mode, "multivariate|univariate");
  cmd_filter->add_option("--alpha", filt.alpha, "per-segment shape");
  cmd_filter->add_option("--gamma", filt.gamma, "discount factor");
  cmd_filter->add_option("--burn-in", filt.burn_in, "evaluation burn-in (default 30)");
  cmd_filter->add_option("--tau-multiple", filt.tau_multiple,
                         "on-time threshold as a multiple of free-flow (default 1.5)");
  cmd_filter->add_option("--init-a", filt.init_a, "environment prior shape override");
  cmd_filter->add_option("--init-b", filt.init_b, "environment prior rate override");
  cmd_filter->add_option("--out-dir", filt.out_dir, "output directory");

  GridOptions grid;
  auto* cmd_grid = app.add_subcommand("grid", "Hyperparameter grid search");
  cmd_grid->add_option("--observations", grid.observations_path, "observations.csv")
      ->required();
  cmd_grid->add_option("--mode", grid.mode, "multivariate|univariate");
  cmd_grid->add_option("--alpha-grid", grid.alpha_grid, "alpha values")->delimiter(',');
  cmd_grid->add_option("--gamma-grid", grid.gamma_grid, "gamma values")->delimiter(',');
  cmd_grid->add_option("--burn-in", grid.burn_in, "evaluation burn-in");
  cmd_grid->add_option("--jobs", grid.jobs, "parallel cells")->default_val(default_jobs());
  cmd_grid->add_option("--out-dir", grid.out_dir, "output directory");

  GibbsOptions gibbs;
  auto* cmd_gibbs = app.add_subcommand("gibbs", "Conditional Gibbs sampler for "
                                                "segment rates and environment path");
  cmd_gibbs->add_option("--observations", gibbs.observations_path, "observations.csv")
      ->required();
  cmd_gibbs->add_option("--corridor", gibbs.corridor_path, "corridor.json");
  cmd_gibbs->add_option("--alpha", gibbs.alpha, "per-segment shape");
  cmd_gibbs->add_option("--gamma", gibbs.gamma, "discount factor");
  cmd_gibbs->add_option("--chains", gibbs.chains, "number of chains");
  cmd_gibbs->add_option("--iters", gibbs.iters, "iterations per chain");
  cmd_gibbs->add_option("--mcmc-burn-in", gibbs.mcmc_burn_in, "discarded iterations");
  cmd_gibbs->add_option("--thin", gibbs.thin, "thinning stride");
  cmd_gibbs->add_option("--prior-r0", gibbs.prior_r0, "rate prior shape");
  cmd_gibbs->add_option("--prior-q0", gibbs.prior_q0, "rate prior rate");
  cmd_gibbs->add_option("--init-a", gibbs.init_a, "environment prior shape override");
  cmd_gibbs->add_option("--init-b", gibbs.init_b, "environment prior rate override");
  cmd_gibbs->add_option("--seed", gibbs.seed, "random seed");
  cmd_gibbs->add_option("--jobs", gibbs.jobs, "parallel chains")
      ->default_val(default_jobs());
  cmd_gibbs->add_option("--out-dir", gibbs.out_dir, "output directory");

  PfOptions pf;
  auto* cmd_pf = app.add_subcommand("pf", "Sequential particle filter");
  cmd_pf->add_option("--observations", pf.observations_path, "observations.csv")
      ->required();
  cmd_pf->add_option("--corridor", pf.corridor_path, "corridor.json");
  cmd_pf->add_option("--alpha", pf.alpha, "per-segment shape");
  cmd_pf->add_option("--gamma", pf.gamma, "discount factor");
  cmd_pf->add_option("--particles", pf.particles, "particle count");
  cmd_pf->add_option("--ess-threshold", pf.ess_threshold, "resample when ESS < t*N");
  cmd_pf->add_flag("--fixed-lambda", pf.fixed_lambda, "freeze the segment rates");
  cmd_pf->add_option("--prior-r0", pf.prior_r0, "rate prior shape");
  cmd_pf->add_option("--prior-q0", pf.prior_q0, "rate prior rate");
  cmd_pf->add_option("--init-a", pf.init_a, "environment prior shape override");
  cmd_pf->add_option("--init-b", pf.init_b, "environment prior rate override");
  cmd_pf->add_option("--seed", pf.seed, "random seed");
  cmd_pf->add_option("--out-dir", pf.out_dir, "output directory");

  CompareOptions cmp;
  auto* cmd_cmp = app.add_subcommand("compare", "Route-level comparison against "
                                                "static and independence baselines");
  cmd_cmp->add_option("--observations", cmp.observations_path, "observations.csv")
      ->required();
  cmd_cmp->add_option("--alpha", cmp.alpha, "per-segment shape");
  cmd_cmp->add_option("--gamma", cmp.gamma, "discount factor");
  cmd_cmp->add_option("--burn-in", cmp.burn_in, "evaluation burn-in");
  cmd_cmp->add_option("--copula-draws", cmp.copula_draws, "Monte Carlo draws");
  cmd_cmp->add_option("--seed", cmp.seed, "random seed");
  cmd_cmp->add_option("--out-dir", cmp.out_dir, "output directory");

  StaticFitOptions sfit;
  auto* cmd_sfit = app.add_subcommand("static-fit", "Fit static distributions to "
                                                    "route travel time");
  cmd_sfit->add_option("--observations", sfit.observations_path, "observations.csv")
      ->required();
  cmd_sfit->add_option("--families", sfit.families,
                       "subset of gamma,lognormal,inverse_gaussian,weibull,normal")
      ->delimiter(',');
  cmd_sfit->add_option("--out-dir", sfit.out_dir, "output directory");

  MixtureOptions mix;
  auto* cmd_mix = app.add_subcommand("mixture", "Gamma mixture decomposition of "
                                                "route travel time");
  cmd_mix->add_option("--observations", mix.observations_path, "observations.csv")
      ->required();
  cmd_mix->add_option("--k", mix.components, "component counts to fit")->delimiter(',');
  cmd_mix->add_option("--restarts", mix.restarts, "EM restarts");
  cmd_mix->add_option("--seed", mix.seed, "random seed");
  cmd_mix->add_option("--out-dir", mix.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    emit_error("config", e.what());
    return 4;
  }

  try {
    if (*cmd_ingest) run_ingest(ingest);
    if (*cmd_sim) run_simulate(sim);
    if (*cmd_filter) run_filter_cmd(filt);
    if (*cmd_grid) run_grid(grid);
    if (*cmd_gibbs) run_gibbs_cmd(gibbs);
    if (*cmd_pf) run_pf(pf);
    if (*cmd_cmp) run_compare(cmp);
    if (*cmd_sfit) run_static_fit(sfit);
    if (*cmd_mix) run_mixture(mix);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 4;
  } catch (const DataError& e) {
    emit_error("data", e.what());
    return 2;
  } catch (const NumericError& e) {
    emit_error("numeric", e.what());
    return 3;
  } catch (const DomainError& e) {
    emit_error("numeric", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("numeric", e.what());
    return 3;
  }
  return 0;
}

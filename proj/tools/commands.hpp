#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dyngam::cli {

struct IngestOptions {
  std::string sensors_path;
  std::string speeds_path;
  std::string distances_path;  // optional override
  std::string out_dir = ".";
  std::string weekday;         // name or 0..6; empty = no filter
  std::string hours;           // "14-20" inclusive; empty = no filter
  int year = 0;                // 0 = no filter
  double merge_below = 0.0;    // drop co-located sensors closer than this (miles)
};
void run_ingest(const IngestOptions& opt);

struct SimulateOptions {
  double alpha = 1.0;
  double gamma = 0.7;
  int m = 16;
  std::vector<double> lambdas;  // overrides m when nonempty
  long T = 248;
  double a0 = 2.5;
  double b0 = 2.5;
  std::uint64_t seed = 20190102;
  std::string out_dir = ".";
};
void run_simulate(const SimulateOptions& opt);

struct FilterOptions {
  std::string observations_path;
  std::string corridor_path;  // optional corridor.json with segment rates
  std::string mode = "multivariate";
  double alpha = 1.0;
  double gamma = 0.7;
  int burn_in = 30;
  double tau_multiple = 1.5;
  double init_a = 0.0;  // both init fields > 0 override the default prior rule
  double init_b = 0.0;
  std::string out_dir = ".";
};
void run_filter_cmd(const FilterOptions& opt);

struct GridOptions {
  std::string observations_path;
  std::string mode = "multivariate";
  std::vector<double> alpha_grid;
  std::vector<double> gamma_grid;
  int burn_in = 30;
  int jobs = 1;
  std::string out_dir = ".";
};
void run_grid(const GridOptions& opt);

struct GibbsOptions {
  std::string observations_path;
  std::string corridor_path;
  double alpha = 1.0;
  double gamma = 0.7;
  int chains = 4;
  int iters = 10000;
  int mcmc_burn_in = 2000;
  int thin = 2;
  double prior_r0 = 1.0;
  double prior_q0 = 1.0;
  double init_a = 0.0;
  double init_b = 0.0;
  std::uint64_t seed = 20190102;
  int jobs = 1;
  std::string out_dir = ".";
};
void run_gibbs_cmd(const GibbsOptions& opt);

struct PfOptions {
  std::string observations_path;
  std::string corridor_path;
  double alpha = 1.0;
  double gamma = 0.7;
  int particles = 2000;
  double ess_threshold = 0.5;
  bool fixed_lambda = false;
  double prior_r0 = 1.0;
  double prior_q0 = 1.0;
  double init_a = 0.0;
  double init_b = 0.0;
  std::uint64_t seed = 20190102;
  std::string out_dir = ".";
};
void run_pf(const PfOptions& opt);

struct CompareOptions {
  std::string observations_path;
  double alpha = 1.0;
  double gamma = 0.7;
  int burn_in = 30;
  std::size_t copula_draws = 50000;
  std::uint64_t seed = 20190102;
  std::string out_dir = ".";
};
void run_compare(const CompareOptions& opt);

struct StaticFitOptions {
  std::string observations_path;
  std::vector<std::string> families;  // empty = all five
  std::string out_dir = ".";
};
void run_static_fit(const StaticFitOptions& opt);

struct MixtureOptions {
  std::string observations_path;
  std::vector<int> components = {1, 2, 3};
  int restarts = 10;
  std::uint64_t seed = 20190102;
  std::string out_dir = ".";
};
void run_mixture(const MixtureOptions& opt);

}  // namespace dyngam::cli

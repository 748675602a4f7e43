#include <fstream>
#include <functional>

#include "commands.hpp"
#include "common.hpp"
#include "dyngam/baselines.hpp"
#include "dyngam/errors.hpp"
#include "dyngam/evalkit.hpp"
#include "dyngam/route.hpp"

namespace dyngam::cli {

namespace {

struct MethodRow {
  std::string method;
  std::string dynamic;
  std::string dependence;
  double ks_p = 0.0;
  double coverage90 = 0.0;
  double iw = 0.0;
};

// Evaluate a static route law on the post-burn-in window: PIT against the
// fixed CDF, coverage of the fixed central 90% interval.
template <typename Law>
MethodRow evaluate_static(const std::string& name, const std::string& dependence,
                          const Law& law, const std::vector<double>& route,
                          int burn_in) {
  std::vector<double> pit;
  const double lo = law.quantile(0.05);
  const double hi = law.quantile(0.95);
  std::size_t covered = 0, n = 0;
  for (std::size_t t = static_cast<std::size_t>(burn_in); t < route.size(); ++t) {
    pit.push_back(law.cdf(route[t]));
    if (route[t] >= lo && route[t] <= hi) ++covered;
    ++n;
  }
  MethodRow row;
  row.method = name;
  row.dynamic = "no";
  row.dependence = dependence;
  row.ks_p = ks_uniform_test(pit).second;
  row.coverage90 = static_cast<double>(covered) / static_cast<double>(n);
  row.iw = hi - lo;
  return row;
}

}  // namespace

void run_compare(const CompareOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  if (obs.observations.size() <= static_cast<std::size_t>(opt.burn_in) + 10) {
    throw DataError("compare: series too short for the configured burn-in");
  }
  const std::vector<double> route = route_totals(obs.observations);
  const auto matrix = to_matrix(obs.observations);

  std::vector<MethodRow> rows;

  // Dynamic corridor model with route predictions through the matched F law.
  double dyn_lag1 = 0.0, dyn_lbq = 0.0, dyn_lbp = 1.0;
  {
    const HyperParams hyper(opt.alpha, opt.gamma);
    const CorridorModel model = calibrate_lambdas(obs.observations);
    auto ev = make_multivariate_route_evaluator(
        hyper, model, default_init_state_mv(obs.observations, hyper, model));
    const CalibrationReport rep = calibrate(*ev, obs.observations, opt.burn_in);
    MethodRow row;
    row.method = "dynamic_gamma";
    row.dynamic = "yes";
    row.dependence = "yes";
    row.ks_p = rep.ks_p;
    row.coverage90 = rep.coverage90;
    row.iw = rep.mean_iw90;
    rows.push_back(row);
    dyn_lag1 = rep.lag1_autocorr;
    dyn_lbq = rep.ljung_box_q;
    dyn_lbp = rep.ljung_box_p;
  }

  {  // Gaussian copula over Gamma marginals, Monte Carlo route law.
    Rng rng(opt.seed);
    const EmpiricalRouteLaw law = route_copula_mc(matrix, opt.copula_draws, rng);
    rows.push_back(evaluate_static("copula_gamma", "yes", law, route, opt.burn_in));
  }

  {  // Single Gamma fitted to pooled route totals.
    const StaticFit fit = fit_static(route, FitFamily::gamma);
    struct FitLaw {
      const StaticFit& f;
      double cdf(double x) const { return f.cdf(x); }
      double quantile(double q) const { return f.quantile(q); }
    };
    rows.push_back(
        evaluate_static("static_gamma", "n/a", FitLaw{fit}, route, opt.burn_in));
  }

  {  // Independent convolutions.
    const GammaRouteLaw gamma_law = route_indep_gamma(matrix);
    rows.push_back(
        evaluate_static("indep_gamma", "no", gamma_law, route, opt.burn_in));
    const NormalRouteLaw normal_law = route_indep_normal(matrix);
    rows.push_back(
        evaluate_static("indep_normal", "no", normal_law, route, opt.burn_in));
  }

  std::ofstream csv(opt.out_dir + "/comparison.csv");
  if (!csv) throw DataError("cannot write comparison.csv");
  csv << "method,dynamic,dependence,ks_p,coverage90,iw\n";
  for (const auto& row : rows) {
    csv << row.method << ',' << row.dynamic << ',' << row.dependence << ','
        << fmt(row.ks_p) << ',' << fmt(row.coverage90) << ',' << fmt(row.iw) << "\n";
  }

  nlohmann::json extra;
  extra["variance_underestimation_ratio"] = variance_underestimation_ratio(matrix);
  extra["n_eval"] = route.size() - static_cast<std::size_t>(opt.burn_in);
  // Sequential PITs are autocorrelated; the KS p-values in comparison.csv must
  // be read together with this dependence diagnostic.
  extra["dynamic_pit_lag1_autocorr"] = dyn_lag1;
  extra["dynamic_pit_ljung_box_q"] = dyn_lbq;
  extra["dynamic_pit_ljung_box_p"] = dyn_lbp;
  write_json(opt.out_dir + "/comparison_notes.json", extra);

  nlohmann::json params;
  params["alpha"] = opt.alpha;
  params["gamma"] = opt.gamma;
  params["burn_in"] = opt.burn_in;
  params["copula_draws"] = opt.copula_draws;
  params["seed"] = opt.seed;
  write_meta(opt.out_dir, "compare", {opt.observations_path}, params);
}

void run_static_fit(const StaticFitOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  const std::vector<double> route = route_totals(obs.observations);

  std::vector<FitFamily> families;
  if (opt.families.empty()) {
    families = {FitFamily::gamma, FitFamily::lognormal, FitFamily::inverse_gaussian,
                FitFamily::weibull, FitFamily::normal};
  } else {
    for (const auto& name : opt.families) families.push_back(family_from_name(name));
  }

  std::ofstream csv(opt.out_dir + "/static_fits.csv");
  if (!csv) throw DataError("cannot write static_fits.csv");
  csv << "distribution,ks_stat,ks_p,aic,bic,loglik,params\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const FitFamily fam : families) {
    const StaticFit fit = fit_static(route, fam);
    csv << family_name(fam) << ',' << fmt(fit.ks_stat) << ',' << fmt(fit.ks_p) << ','
        << fmt(fit.aic) << ',' << fmt(fit.bic) << ',' << fmt(fit.loglik) << ",\"";
    for (std::size_t i = 0; i < fit.params.size(); ++i) {
      csv << (i ? ";" : "") << fmt(fit.params[i]);
    }
    csv << "\"\n";
    nlohmann::json row;
    row["distribution"] = family_name(fam);
    row["params"] = fit.params;
    row["loglik"] = fit.loglik;
    row["aic"] = fit.aic;
    row["bic"] = fit.bic;
    row["ks_stat"] = fit.ks_stat;
    row["ks_p"] = fit.ks_p;
    rows.push_back(row);
  }
  write_json(opt.out_dir + "/static_fits.json", rows);
  write_meta(opt.out_dir, "static-fit", {opt.observations_path}, nlohmann::json::object());
}

void run_mixture(const MixtureOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  const std::vector<double> route = route_totals(obs.observations);

  MixtureConfig config;
  config.restarts = opt.restarts;

  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < opt.components.size(); ++i) {
    Rng rng(derive_seed(opt.seed, i));
    const MixtureFit fit = fit_gamma_mixture(route, opt.components[i], config, rng);
    nlohmann::json row;
    row["k"] = fit.k;
    row["weights"] = fit.weights;
    row["shapes"] = fit.shapes;
    row["rates"] = fit.rates;
    std::vector<double> means;
    for (int k = 0; k < fit.k; ++k) means.push_back(fit.component_mean(k));
    row["means"] = means;
    row["loglik"] = fit.loglik;
    row["bic"] = fit.bic;
    row["converged"] = fit.converged;
    rows.push_back(row);
  }
  write_json(opt.out_dir + "/mixture.json", rows);

  nlohmann::json params;
  params["components"] = opt.components;
  params["restarts"] = opt.restarts;
  params["seed"] = opt.seed;
  write_meta(opt.out_dir, "mixture", {opt.observations_path}, params);
}

}  // namespace dyngam::cli

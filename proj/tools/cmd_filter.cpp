#include <fstream>

#include "commands.hpp"
#include "common.hpp"
#include "dyngam/errors.hpp"
#include "dyngam/evalkit.hpp"
#include "dyngam/route.hpp"

namespace dyngam::cli {

namespace {

CorridorModel corridor_from(const std::string& corridor_path,
                            const ObservationsFile& obs) {
  if (!corridor_path.empty()) {
    std::ifstream in(corridor_path);
    if (!in) throw DataError("cannot open corridor file: " + corridor_path);
    nlohmann::json j;
    in >> j;
    std::vector<double> lambdas = j.at("lambdas").get<std::vector<double>>();
    std::vector<double> distances;
    if (j.contains("distances_mi")) {
      distances = j.at("distances_mi").get<std::vector<double>>();
    }
    std::vector<std::string> ids;
    if (j.contains("segment_ids")) {
      ids = j.at("segment_ids").get<std::vector<std::string>>();
    }
    return CorridorModel(std::move(lambdas), std::move(distances), std::move(ids));
  }
  CorridorModel calibrated = calibrate_lambdas(obs.observations);
  return CorridorModel(calibrated.lambdas(), {}, obs.segment_ids);
}

GammaState initial_state(double init_a, double init_b, const GammaState& fallback) {
  if (init_a > 0.0 && init_b > 0.0) return GammaState(init_a, init_b);
  if (init_a > 0.0 || init_b > 0.0) {
    throw ConfigError("--init-a and --init-b must be given together");
  }
  return fallback;
}

GridMode parse_mode(const std::string& mode) {
  if (mode == "multivariate") return GridMode::multivariate_route;
  if (mode == "univariate") return GridMode::univariate_route;
  throw ConfigError("mode must be 'multivariate' or 'univariate', got '" + mode + "'");
}

}  // namespace

void run_filter_cmd(const FilterOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  if (obs.observations.empty()) throw DataError("empty observation series");
  const GridMode mode = parse_mode(opt.mode);
  const HyperParams hyper(opt.alpha, opt.gamma);

  const double s_ff = free_flow_travel_time(obs.observations);
  const double tau = opt.tau_multiple * s_ff;

  std::ofstream ts(opt.out_dir + "/timeseries.csv");
  if (!ts) throw DataError("cannot write timeseries.csv");
  ts << "t,q05,q25,q50,q75,q95,pit,on_time_prob,pti,bi\n";

  double alpha_star = opt.alpha;
  nlohmann::json report;

  if (mode == GridMode::multivariate_route) {
    const CorridorModel model = corridor_from(opt.corridor_path, obs);
    alpha_star = moment_match(hyper, model).first;
    const GammaState init = initial_state(
        opt.init_a, opt.init_b, default_init_state_mv(obs.observations, hyper, model));
    GammaState state = init;
    for (std::size_t t = 0; t < obs.observations.size(); ++t) {
      const GammaState prior = evolve_state(state, hyper);
      const RoutePredictive rp = route_predictive(hyper, model, prior);
      double route = 0.0;
      for (double v : obs.observations[t].y) route += v;
      ts << t << ',' << fmt(route_quantile(rp, 0.05)) << ','
         << fmt(route_quantile(rp, 0.25)) << ',' << fmt(route_quantile(rp, 0.50)) << ','
         << fmt(route_quantile(rp, 0.75)) << ',' << fmt(route_quantile(rp, 0.95)) << ','
         << fmt(route_cdf(rp, route)) << ',' << fmt(on_time_probability(rp, tau)) << ','
         << fmt(planning_time_index(rp, s_ff)) << ',' << fmt(buffer_index(rp)) << "\n";
      state = update_state_mv(prior, hyper, model, obs.observations[t]);
    }
    auto ev = make_multivariate_route_evaluator(hyper, model, init);
    const CalibrationReport rep = calibrate(*ev, obs.observations, opt.burn_in);
    report["ks_stat"] = rep.ks_stat;
    report["ks_p"] = rep.ks_p;
    report["coverage90"] = rep.coverage90;
    report["mean_iw90"] = rep.mean_iw90;
    report["log_pred_lik"] = rep.log_pred_lik;
    report["lag1_autocorr"] = rep.lag1_autocorr;
    report["ljung_box_q"] = rep.ljung_box_q;
    report["ljung_box_p"] = rep.ljung_box_p;
    report["n_eval"] = rep.n_eval;
  } else {
    const ObservationSeries route_series = to_route_series(obs.observations);
    const GammaState init =
        initial_state(opt.init_a, opt.init_b, default_init_state(route_series, hyper));
    GammaState state = init;
    for (std::size_t t = 0; t < route_series.size(); ++t) {
      const GammaState prior = evolve_state(state, hyper);
      const double route = route_series[t].y[0];
      const auto q = [&](double p) { return predictive_quantile(prior, hyper, p); };
      const double q50 = q(0.50);
      const double q95 = q(0.95);
      ts << t << ',' << fmt(q(0.05)) << ',' << fmt(q(0.25)) << ',' << fmt(q50) << ','
         << fmt(q(0.75)) << ',' << fmt(q95) << ','
         << fmt(predictive_cdf(prior, hyper, route)) << ','
         << fmt(predictive_cdf(prior, hyper, tau)) << ',' << fmt(q95 / s_ff) << ','
         << fmt((q95 - q50) / q50) << "\n";
      state = update_state(prior, hyper, route_series[t]);
    }
    auto ev = make_univariate_route_evaluator(hyper, init);
    const CalibrationReport rep = calibrate(*ev, route_series, opt.burn_in);
    report["ks_stat"] = rep.ks_stat;
    report["ks_p"] = rep.ks_p;
    report["coverage90"] = rep.coverage90;
    report["mean_iw90"] = rep.mean_iw90;
    report["log_pred_lik"] = rep.log_pred_lik;
    report["lag1_autocorr"] = rep.lag1_autocorr;
    report["ljung_box_q"] = rep.ljung_box_q;
    report["ljung_box_p"] = rep.ljung_box_p;
    report["n_eval"] = rep.n_eval;
  }

  report["alpha"] = opt.alpha;
  report["gamma"] = opt.gamma;
  report["alpha_star"] = alpha_star;
  report["mode"] = opt.mode;
  report["s_freeflow"] = s_ff;
  report["tau"] = tau;
  report["burn_in"] = opt.burn_in;
  write_json(opt.out_dir + "/report.json", report);

  std::vector<std::string> inputs = {opt.observations_path};
  if (!opt.corridor_path.empty()) inputs.push_back(opt.corridor_path);
  nlohmann::json params;
  params["alpha"] = opt.alpha;
  params["gamma"] = opt.gamma;
  params["mode"] = opt.mode;
  params["burn_in"] = opt.burn_in;
  params["tau_multiple"] = opt.tau_multiple;
  params["init_a"] = opt.init_a;
  params["init_b"] = opt.init_b;
  write_meta(opt.out_dir, "filter", inputs, params);
}

void run_grid(const GridOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const ObservationsFile obs = load_observations(opt.observations_path);
  const GridMode mode = parse_mode(opt.mode);
  std::vector<double> alphas = opt.alpha_grid;
  std::vector<double> gammas = opt.gamma_grid;
  if (alphas.empty()) alphas = {0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0};
  if (gammas.empty()) gammas = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99};

  const GridResult result =
      grid_search(obs.observations, alphas, gammas, mode, opt.burn_in, opt.jobs);

  std::ofstream csv(opt.out_dir + "/grid.csv");
  if (!csv) throw DataError("cannot write grid.csv");
  csv << "alpha,gamma,alpha_star,log_pred_lik,ks_stat,ks_p,coverage90,iw90,"
         "lag1_autocorr,ljung_box_q,n_eval,failed\n";
  for (const auto& cell : result.cells) {
    csv << fmt(cell.alpha) << ',' << fmt(cell.gamma) << ',' << fmt(cell.alpha_star) << ',';
    if (cell.failed) {
      csv << ",,,,,,,,1\n";  // eight empty metric fields, failed flag set
      continue;
    }
    const auto& r = cell.report;
    csv << fmt(r.log_pred_lik) << ',' << fmt(r.ks_stat) << ',' << fmt(r.ks_p) << ','
        << fmt(r.coverage90) << ',' << fmt(r.mean_iw90) << ',' << fmt(r.lag1_autocorr)
        << ',' << fmt(r.ljung_box_q) << ',' << r.n_eval << ',' << 0 << "\n";
  }

  const GridCell& best = result.cells[result.selected];
  nlohmann::json selected;
  selected["alpha"] = best.alpha;
  selected["gamma"] = best.gamma;
  selected["alpha_star"] = best.alpha_star;
  selected["ks_stat"] = best.report.ks_stat;
  selected["ks_p"] = best.report.ks_p;
  selected["coverage90"] = best.report.coverage90;
  selected["mean_iw90"] = best.report.mean_iw90;
  selected["log_pred_lik"] = best.report.log_pred_lik;
  selected["lag1_autocorr"] = best.report.lag1_autocorr;
  selected["ljung_box_q"] = best.report.ljung_box_q;
  selected["ljung_box_p"] = best.report.ljung_box_p;
  selected["n_eval"] = best.report.n_eval;
  selected["mode"] = opt.mode;
  write_json(opt.out_dir + "/selected.json", selected);

  nlohmann::json params;
  params["alpha_grid"] = alphas;
  params["gamma_grid"] = gammas;
  params["mode"] = opt.mode;
  params["burn_in"] = opt.burn_in;
  params["jobs"] = opt.jobs;
  write_meta(opt.out_dir, "grid", {opt.observations_path}, params);
}

}  // namespace dyngam::cli

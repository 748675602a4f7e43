#include <algorithm>
#include <cctype>
#include <fstream>

#include "commands.hpp"
#include "common.hpp"
#include "dyngam/errors.hpp"
#include "dyngam/rng.hpp"

namespace dyngam::cli {

namespace {

int parse_weekday(const std::string& text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(c)));
  const std::vector<std::string> names = {"sun", "mon", "tue", "wed",
                                          "thu", "fri", "sat"};
  for (int i = 0; i < 7; ++i) {
    if (lower.rfind(names[i], 0) == 0) return i;
  }
  try {
    const int v = std::stoi(lower);
    if (v >= 0 && v <= 6) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("unrecognized weekday: '" + text + "' (use sun..sat or 0..6)");
}

std::pair<int, int> parse_hours(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw ConfigError("hours must look like 14-20");
  try {
    const int lo = std::stoi(text.substr(0, dash));
    const int hi = std::stoi(text.substr(dash + 1));
    if (lo < 0 || hi > 23 || lo > hi) throw ConfigError("hours out of range: " + text);
    return {lo, hi};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("hours must look like 14-20, got '" + text + "'");
  }
}

}  // namespace

void run_ingest(const IngestOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const auto sensors = read_sensors_csv(opt.sensors_path);
  const auto speeds = read_speeds_csv(opt.speeds_path);

  Schedule sched;
  if (!opt.weekday.empty()) sched.weekday = parse_weekday(opt.weekday);
  if (!opt.hours.empty()) sched.hours = parse_hours(opt.hours);
  if (opt.year != 0) sched.year = opt.year;

  std::vector<double> override_dist;
  if (!opt.distances_path.empty()) {
    override_dist = read_distances_csv(opt.distances_path, sensors);
  }

  const CorridorDataset data =
      build_corridor(sensors, speeds, sched, override_dist, opt.merge_below);
  if (data.observations.empty()) {
    throw DataError("ingest produced no complete observations");
  }
  write_observations_csv(opt.out_dir + "/observations.csv", data);

  const CorridorModel model = calibrate_lambdas(data.observations);
  double total = 0.0;
  for (double d : data.distances_mi) total += d;
  nlohmann::json corridor;
  corridor["segment_ids"] = data.segment_ids;
  corridor["distances_mi"] = data.distances_mi;
  corridor["total_distance_mi"] = total;
  corridor["lambdas"] = model.lambdas();
  corridor["n_observations"] = data.observations.size();
  corridor["schedule_slots"] = data.schedule_slots;
  corridor["dropped"] = data.dropped;
  write_json(opt.out_dir + "/corridor.json", corridor);

  std::vector<std::string> inputs = {opt.sensors_path, opt.speeds_path};
  if (!opt.distances_path.empty()) inputs.push_back(opt.distances_path);
  nlohmann::json params;
  params["weekday"] = opt.weekday;
  params["hours"] = opt.hours;
  params["year"] = opt.year;
  params["merge_below"] = opt.merge_below;
  write_meta(opt.out_dir, "ingest", inputs, params);
}

void run_simulate(const SimulateOptions& opt) {
  ensure_out_dir(opt.out_dir);
  std::vector<double> lambdas = opt.lambdas;
  if (lambdas.empty()) {
    if (opt.m < 1) throw ConfigError("simulate: m must be at least 1");
    lambdas.assign(static_cast<std::size_t>(opt.m), 1.0);
  }
  if (opt.T < 1) throw ConfigError("simulate: T must be at least 1");
  const CorridorModel model(lambdas);
  const HyperParams hyper(opt.alpha, opt.gamma);
  Rng rng(opt.seed);
  const SimulatedCorridor sim = simulate_corridor(
      hyper, model, static_cast<std::size_t>(opt.T), GammaState(opt.a0, opt.b0), rng);

  CorridorDataset data;
  data.segment_ids = model.segment_ids();
  data.distances_mi.assign(model.size(), 1.0);
  data.observations = sim.observations;
  for (long t = 0; t < opt.T; ++t) data.timestamps.push_back(std::to_string(t));
  write_observations_csv(opt.out_dir + "/observations.csv", data);

  std::ofstream eta(opt.out_dir + "/eta.csv");
  if (!eta) throw DataError("cannot write eta.csv");
  eta << "t,eta\n";
  for (std::size_t t = 0; t < sim.eta_path.size(); ++t) {
    eta << t << ',' << fmt(sim.eta_path[t]) << "\n";
  }

  nlohmann::json params;
  params["alpha"] = opt.alpha;
  params["gamma"] = opt.gamma;
  params["lambdas"] = model.lambdas();
  params["T"] = opt.T;
  params["a0"] = opt.a0;
  params["b0"] = opt.b0;
  params["seed"] = opt.seed;
  write_meta(opt.out_dir, "simulate", {}, params);
}

}  // namespace dyngam::cli

#include "dyngam/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dyngam/errors.hpp"

namespace dyngam {

namespace {

constexpr double kEarthRadiusMiles = 3958.7613;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("failed to parse number '" + s + "' in " + context);
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

}  // namespace

double haversine_miles(double lat1, double lon1, double lat2, double lon2) {
  for (double v : {lat1, lon1, lat2, lon2}) {
    if (!std::isfinite(v)) throw DataError("haversine_miles: non-finite coordinate");
  }
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double dphi = (lat2 - lat1) * kDegToRad;
  const double dlam = (lon2 - lon1) * kDegToRad;
  const double s1 = std::sin(0.5 * dphi);
  const double s2 = std::sin(0.5 * dlam);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

int HourStamp::weekday() const {
  // days_from_civil(1970,1,1) == 0 fell on a Thursday.
  long days = days_from_civil(year, month, day);
  return static_cast<int>(((days % 7) + 11) % 7);  // 0 = Sunday
}

std::string HourStamp::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00", year, month, day, hour);
  return buf;
}

HourStamp parse_hour_stamp(const std::string& text) {
  HourStamp hs;
  char sep = 0;
  const int got = std::sscanf(text.c_str(), "%d-%d-%d%c%d", &hs.year, &hs.month, &hs.day,
                              &sep, &hs.hour);
  if (got < 5 || (sep != 'T' && sep != ' ') || hs.month < 1 || hs.month > 12 ||
      hs.day < 1 || hs.day > 31 || hs.hour < 0 || hs.hour > 23) {
    throw DataError("unparseable timestamp: '" + text + "'");
  }
  return hs;
}

CorridorDataset build_corridor(const std::vector<SensorRecord>& sensors,
                               const std::vector<SpeedRecord>& speeds,
                               const Schedule& schedule,
                               const std::vector<double>& distance_override,
                               double merge_below_miles) {
  if (sensors.empty()) throw DataError("build_corridor: no sensors");
  std::vector<SensorRecord> ordered = sensors;
  std::sort(ordered.begin(), ordered.end(),
            [](const SensorRecord& a, const SensorRecord& b) { return a.order < b.order; });
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i > 0 && ordered[i].order == ordered[i - 1].order) {
      throw DataError("build_corridor: duplicate sensor order " +
                      std::to_string(ordered[i].order));
    }
  }

  if (merge_below_miles > 0.0) {
    std::vector<SensorRecord> kept;
    for (const auto& s : ordered) {
      if (!kept.empty() &&
          haversine_miles(kept.back().lat, kept.back().lon, s.lat, s.lon) <
              merge_below_miles) {
        continue;  // drop the downstream sensor of a co-located pair
      }
      kept.push_back(s);
    }
    ordered = std::move(kept);
  }
  const std::size_t m = ordered.size();

  CorridorDataset out;
  out.segment_ids.reserve(m);
  for (const auto& s : ordered) out.segment_ids.push_back(s.sensor_id);

  if (!distance_override.empty()) {
    if (distance_override.size() != m) {
      throw ShapeError("build_corridor: distance override length mismatch");
    }
    out.distances_mi = distance_override;
  } else {
    out.distances_mi.resize(m);
    for (std::size_t j = 0; j + 1 < m; ++j) {
      out.distances_mi[j] = haversine_miles(ordered[j].lat, ordered[j].lon,
                                            ordered[j + 1].lat, ordered[j + 1].lon);
    }
    // Last sensor has no downstream neighbor; reuse the preceding segment.
    out.distances_mi[m - 1] = m > 1 ? out.distances_mi[m - 2] : 0.0;
  }
  for (double d : out.distances_mi) {
    if (!(d > 0.0)) throw DataError("build_corridor: nonpositive segment distance");
  }

  std::map<std::string, std::size_t> index_of;
  for (std::size_t j = 0; j < m; ++j) index_of[ordered[j].sensor_id] = j;
  std::map<std::string, bool> known;
  for (const auto& s : sensors) known[s.sensor_id] = true;

  // timestamp -> per-sensor speeds (missing = NaN)
  std::map<std::string, std::vector<double>> by_time;
  for (const auto& rec : speeds) {
    const auto it = index_of.find(rec.sensor_id);
    if (it == index_of.end()) {
      if (known.count(rec.sensor_id)) continue;  // sensor merged away
      throw DataError("build_corridor: unknown sensor id '" + rec.sensor_id +
                      "' in speeds input");
    }
    const HourStamp hs = parse_hour_stamp(rec.timestamp);
    if (schedule.weekday && hs.weekday() != *schedule.weekday) continue;
    if (schedule.hours && (hs.hour < schedule.hours->first || hs.hour > schedule.hours->second))
      continue;
    if (schedule.year && hs.year != *schedule.year) continue;
    auto& row = by_time
                    .try_emplace(hs.to_string(),
                                 std::vector<double>(m, std::numeric_limits<double>::quiet_NaN()))
                    .first->second;
    if (rec.speed_mph) {
      if (*rec.speed_mph <= 0.0) {
        throw DataError("build_corridor: nonpositive speed for sensor " + rec.sensor_id +
                        " at " + rec.timestamp);
      }
      row[it->second] = *rec.speed_mph;
    }
  }

  out.schedule_slots = by_time.size();
  long t = 0;
  for (const auto& [stamp, row] : by_time) {
    const bool complete =
        std::none_of(row.begin(), row.end(), [](double v) { return std::isnan(v); });
    if (!complete) {
      ++out.dropped;
      continue;
    }
    ObservationRecord obs;
    obs.t = t++;
    obs.y.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      obs.y[j] = 60.0 * out.distances_mi[j] / row[j];  // minutes
    }
    out.observations.push_back(std::move(obs));
    out.timestamps.push_back(stamp);
  }
  return out;
}

SimulatedCorridor simulate_corridor(const HyperParams& hyper, const CorridorModel& model,
                                    std::size_t T, const GammaState& init_env, Rng& rng) {
  SimulatedCorridor out;
  out.observations.reserve(T);
  out.eta_path.reserve(T);
  const double gamma = hyper.gamma_discount;
  const std::size_t m = model.size();

  double eta = gamma_sample(GammaLaw(init_env.a, init_env.b), rng);
  // Filter bookkeeping drives the Beta innovation parameters.
  double a = init_env.a;
  double b = init_env.b;
  for (std::size_t t = 0; t < T; ++t) {
    const double eps = beta_sample(gamma * a, (1.0 - gamma) * a, rng);
    eta = eta / gamma * eps;
    ObservationRecord obs;
    obs.t = static_cast<long>(t);
    obs.y.resize(m);
    double wsum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      obs.y[j] = gamma_sample(GammaLaw(hyper.alpha, model.lambdas()[j] * eta), rng);
      wsum += model.lambdas()[j] * obs.y[j];
    }
    a = gamma * a + static_cast<double>(m) * hyper.alpha;
    b = gamma * b + wsum;
    out.eta_path.push_back(eta);
    out.observations.push_back(std::move(obs));
  }
  return out;
}

std::vector<SensorRecord> read_sensors_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty sensors file: " + path);
  std::vector<SensorRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) {
      throw DataError("sensors.csv line " + std::to_string(lineno) +
                      ": expected 4 fields, got " + std::to_string(f.size()));
    }
    SensorRecord rec;
    rec.sensor_id = f[0];
    rec.lat = parse_double(f[1], path);
    rec.lon = parse_double(f[2], path);
    rec.order = static_cast<int>(parse_double(f[3], path));
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SpeedRecord> read_speeds_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty speeds file: " + path);
  std::vector<SpeedRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw DataError("speeds.csv line " + std::to_string(lineno) +
                      ": expected 3 fields, got " + std::to_string(f.size()));
    }
    SpeedRecord rec;
    rec.timestamp = f[0];
    rec.sensor_id = f[1];
    if (!f[2].empty()) rec.speed_mph = parse_double(f[2], path);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_observations_csv(const std::string& path, const CorridorDataset& data) {
  std::ofstream outf(path);
  if (!outf) throw DataError("cannot write file: " + path);
  outf << "timestamp";
  for (const auto& id : data.segment_ids) outf << ",y_" << id;
  outf << "\n";
  char buf[32];
  for (std::size_t t = 0; t < data.observations.size(); ++t) {
    outf << (t < data.timestamps.size() ? data.timestamps[t] : std::to_string(t));
    for (double v : data.observations[t].y) {
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      outf << ',' << buf;
    }
    outf << "\n";
  }
}

ObservationsFile read_observations_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty observations file: " + path);
  line = strip_cr(line);
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "timestamp") {
    throw DataError("observations.csv: expected header timestamp,y_<id>,...");
  }
  ObservationsFile out;
  for (std::size_t j = 1; j < header.size(); ++j) {
    std::string id = header[j];
    if (id.rfind("y_", 0) == 0) id = id.substr(2);
    out.segment_ids.push_back(std::move(id));
  }
  const std::size_t m = out.segment_ids.size();
  long t = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != m + 1) {
      throw DataError("observations.csv line " + std::to_string(lineno) +
                      ": expected " + std::to_string(m + 1) + " fields");
    }
    ObservationRecord obs;
    obs.t = t++;
    obs.y.reserve(m);
    for (std::size_t j = 0; j < m; ++j) obs.y.push_back(parse_double(f[j + 1], path));
    out.timestamps.push_back(f[0]);
    out.observations.push_back(std::move(obs));
  }
  return out;
}

std::vector<double> read_distances_csv(const std::string& path,
                                       const std::vector<SensorRecord>& sensors) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty distances file: " + path);
  std::map<std::string, double> by_id;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) {
      throw DataError("distances.csv line " + std::to_string(lineno) +
                      ": expected 2 fields");
    }
    by_id[f[0]] = parse_double(f[1], path);
  }
  std::vector<SensorRecord> ordered = sensors;
  std::sort(ordered.begin(), ordered.end(),
            [](const SensorRecord& a, const SensorRecord& b) { return a.order < b.order; });
  std::vector<double> out;
  out.reserve(ordered.size());
  for (const auto& s : ordered) {
    const auto it = by_id.find(s.sensor_id);
    if (it == by_id.end()) {
      throw DataError("distances.csv: no distance for sensor " + s.sensor_id);
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace dyngam

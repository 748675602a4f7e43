#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyngam/corridor.hpp"
#include "dyngam/rng.hpp"

namespace dyngam {

struct SensorRecord {
  std::string sensor_id;
  double lat = 0.0;
  double lon = 0.0;
  int order = 0;  // upstream -> downstream position, unique and contiguous
};

struct SpeedRecord {
  std::string timestamp;  // ISO-8601, hour resolution
  std::string sensor_id;
  std::optional<double> speed_mph;  // unset = missing reading
};

/// Great-circle distance in miles (Earth radius 3958.7613 mi).
double haversine_miles(double lat1, double lon1, double lat2, double lon2);

/// Hour-truncated calendar stamp parsed from "YYYY-MM-DD[T ]HH[:MM[:SS]]".
struct HourStamp {
  int year = 0, month = 0, day = 0, hour = 0;
  /// 0 = Sunday ... 6 = Saturday.
  int weekday() const;
  std::string to_string() const;
};
HourStamp parse_hour_stamp(const std::string& text);

/// Optional filters applied to candidate time periods.
struct Schedule {
  std::optional<int> weekday;               // 0 = Sunday ... 6 = Saturday
  std::optional<std::pair<int, int>> hours; // inclusive [first, last] hour of day
  std::optional<int> year;
};

struct CorridorDataset {
  std::vector<std::string> segment_ids;
  std::vector<double> distances_mi;
  std::vector<std::string> timestamps;  // one per retained observation
  ObservationSeries observations;       // complete cases only, minutes
  std::size_t schedule_slots = 0;       // candidate periods passing the schedule
  std::size_t dropped = 0;              // periods removed for missing data
};

/// Build per-segment travel times y = 60 * d / v from sensor geometry and
/// hourly speeds. Segment distance is the gap to the next downstream sensor;
/// the last sensor reuses the preceding distance. Any period missing any
/// sensor is dropped (complete-case). Distances may be overridden explicitly.
/// Co-located sensors are kept as distinct segments by default; a positive
/// merge_below_miles drops the downstream sensor of any pair closer than the
/// threshold (sensitivity-analysis knob).
CorridorDataset build_corridor(const std::vector<SensorRecord>& sensors,
                               const std::vector<SpeedRecord>& speeds,
                               const Schedule& schedule,
                               const std::vector<double>& distance_override = {},
                               double merge_below_miles = 0.0);

struct SimulatedCorridor {
  ObservationSeries observations;
  std::vector<double> eta_path;  // latent environment, one entry per period
};

/// Generative pass of the corridor model: the environment moves by Beta
/// innovations whose parameters come from the filter recursion carried
/// alongside, then each segment draws Gamma(alpha, lambda_j * eta_t).
/// Latents are returned for oracle comparisons.
SimulatedCorridor simulate_corridor(const HyperParams& hyper, const CorridorModel& model,
                                    std::size_t T, const GammaState& init_env, Rng& rng);

// --- CSV surfaces (comma-delimited, UTF-8, '.' decimal separator, LF) ---

/// sensors.csv: header sensor_id,lat,lon,order
std::vector<SensorRecord> read_sensors_csv(const std::string& path);

/// speeds.csv: header timestamp,sensor_id,speed_mph (empty speed = missing)
std::vector<SpeedRecord> read_speeds_csv(const std::string& path);

/// observations.csv: header timestamp,y_<id>,... ; values in minutes at 6
/// decimal places.
void write_observations_csv(const std::string& path, const CorridorDataset& data);

struct ObservationsFile {
  std::vector<std::string> segment_ids;
  std::vector<std::string> timestamps;
  ObservationSeries observations;
};
ObservationsFile read_observations_csv(const std::string& path);

/// distances.csv override: header sensor_id,distance_mi
std::vector<double> read_distances_csv(const std::string& path,
                                       const std::vector<SensorRecord>& sensors);

}  // namespace dyngam

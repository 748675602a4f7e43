#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "dyngam/corridor.hpp"
#include "dyngam/dataio.hpp"
#include "dyngam/errors.hpp"
#include "support/stats.hpp"

using namespace dyngam;

namespace {

std::vector<SensorRecord> three_sensors() {
  // Roughly one mile apart heading north.
  return {{"s1", 41.80, -87.70, 1}, {"s2", 41.8145, -87.70, 2}, {"s3", 41.8290, -87.70, 3}};
}

std::vector<SpeedRecord> speeds_for(const std::vector<std::string>& stamps,
                                    const std::vector<std::vector<double>>& table) {
  std::vector<SpeedRecord> out;
  for (std::size_t t = 0; t < stamps.size(); ++t) {
    for (std::size_t j = 0; j < table[t].size(); ++j) {
      SpeedRecord rec;
      rec.timestamp = stamps[t];
      rec.sensor_id = "s" + std::to_string(j + 1);
      if (table[t][j] > 0.0) rec.speed_mph = table[t][j];
      out.push_back(rec);
    }
  }
  return out;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "dyngam_dataio_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("haversine_miles known values and symmetry") {
  CHECK(haversine_miles(41.8, -87.7, 41.8, -87.7) == 0.0);
  // One degree of longitude on the equator.
  CHECK(haversine_miles(0.0, 0.0, 0.0, 1.0) == doctest::Approx(69.0934).epsilon(0.01 / 69.0));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-179.0, 179.0);
  for (int i = 0; i < 50; ++i) {
    const double a1 = lat(gen), o1 = lon(gen), a2 = lat(gen), o2 = lon(gen);
    CHECK(haversine_miles(a1, o1, a2, o2) ==
          doctest::Approx(haversine_miles(a2, o2, a1, o1)).epsilon(1e-13));
  }
}

TEST_CASE("parse_hour_stamp formats and weekday") {
  const HourStamp hs = parse_hour_stamp("2019-01-02T14:00:00");
  CHECK(hs.year == 2019);
  CHECK(hs.month == 1);
  CHECK(hs.day == 2);
  CHECK(hs.hour == 14);
  CHECK(hs.weekday() == 3);  // 2019-01-02 fell on a Wednesday
  CHECK(hs.to_string() == "2019-01-02T14:00");

  const HourStamp sp = parse_hour_stamp("2019-07-04 09:30");
  CHECK(sp.hour == 9);
  CHECK(sp.weekday() == 4);  // Thursday

  CHECK_THROWS_AS(parse_hour_stamp("not-a-time"), DataError);
  CHECK_THROWS_AS(parse_hour_stamp("2019-13-02T05:00"), DataError);
}

TEST_CASE("build_corridor travel times, distances, and complete-case filtering") {
  const auto sensors = three_sensors();
  const std::vector<std::string> stamps = {"2019-01-02T14:00", "2019-01-02T15:00",
                                           "2019-01-02T16:00"};
  // Second period is missing sensor 2.
  const auto speeds = speeds_for(stamps, {{30.0, 30.0, 30.0},
                                          {30.0, 0.0, 30.0},
                                          {60.0, 30.0, 20.0}});
  const auto data = build_corridor(sensors, speeds, Schedule{});
  CHECK(data.segment_ids == std::vector<std::string>{"s1", "s2", "s3"});
  REQUIRE(data.distances_mi.size() == 3);
  CHECK(data.distances_mi[0] == doctest::Approx(1.0).epsilon(0.01));
  // Last sensor reuses the preceding distance.
  CHECK(data.distances_mi[2] == data.distances_mi[1]);

  CHECK(data.schedule_slots == 3);
  CHECK(data.dropped == 1);
  REQUIRE(data.observations.size() == 2);
  // y = 60 * d / v minutes.
  CHECK(data.observations[0].y[0] ==
        doctest::Approx(60.0 * data.distances_mi[0] / 30.0).epsilon(1e-12));
  CHECK(data.observations[1].y[0] ==
        doctest::Approx(60.0 * data.distances_mi[0] / 60.0).epsilon(1e-12));

  // Conservation: retained + dropped = schedule slots.
  CHECK(data.observations.size() + data.dropped == data.schedule_slots);
}

TEST_CASE("build_corridor is stable under input row order") {
  const auto sensors = three_sensors();
  const std::vector<std::string> stamps = {"2019-01-02T14:00", "2019-01-02T15:00"};
  auto speeds = speeds_for(stamps, {{31.0, 29.0, 33.0}, {28.0, 26.0, 35.0}});
  const auto base = build_corridor(sensors, speeds, Schedule{});
  std::reverse(speeds.begin(), speeds.end());
  std::vector<SensorRecord> shuffled = {sensors[2], sensors[0], sensors[1]};
  const auto permuted = build_corridor(shuffled, speeds, Schedule{});
  REQUIRE(base.observations.size() == permuted.observations.size());
  for (std::size_t t = 0; t < base.observations.size(); ++t) {
    CHECK(base.observations[t].y == permuted.observations[t].y);
  }
}

TEST_CASE("build_corridor error paths") {
  const auto sensors = three_sensors();
  std::vector<SpeedRecord> unknown = {{"2019-01-02T14:00", "mystery", 30.0}};
  CHECK_THROWS_WITH_AS(build_corridor(sensors, unknown, Schedule{}),
                       doctest::Contains("mystery"), DataError);

  std::vector<SpeedRecord> zero = {{"2019-01-02T14:00", "s1", 0.0}};
  CHECK_THROWS_AS(build_corridor(sensors, zero, Schedule{}), DataError);

  auto dup = sensors;
  dup[1].order = 1;
  CHECK_THROWS_AS(build_corridor(dup, {}, Schedule{}), DataError);
}

TEST_CASE("schedule filters select weekday, hour window, and year") {
  const auto sensors = three_sensors();
  const std::vector<std::string> stamps = {
      "2019-01-02T14:00",  // Wed 2pm: keep
      "2019-01-02T21:00",  // Wed 9pm: hour filter drops
      "2019-01-03T15:00",  // Thu: weekday filter drops
      "2018-01-03T15:00",  // Wed but 2018: year filter drops
      "2019-01-09T20:00",  // Wed 8pm: keep
  };
  std::vector<std::vector<double>> table(stamps.size(), {30.0, 30.0, 30.0});
  Schedule sched;
  sched.weekday = 3;
  sched.hours = {14, 20};
  sched.year = 2019;
  const auto data = build_corridor(sensors, speeds_for(stamps, table), sched);
  CHECK(data.schedule_slots == 2);
  CHECK(data.observations.size() == 2);
  CHECK(data.timestamps[0] == "2019-01-02T14:00");
  CHECK(data.timestamps[1] == "2019-01-09T20:00");
}

TEST_CASE("co-located sensors can be merged away for sensitivity runs") {
  // Second and third sensors sit ~40 meters apart.
  const std::vector<SensorRecord> sensors = {{"a", 41.80, -87.70, 1},
                                             {"b", 41.8145, -87.70, 2},
                                             {"c", 41.81475, -87.70, 3},
                                             {"d", 41.8290, -87.70, 4}};
  std::vector<SpeedRecord> speeds;
  for (const auto& s : sensors) {
    speeds.push_back({"2019-01-02T14:00", s.sensor_id, 30.0});
  }
  const auto kept = build_corridor(sensors, speeds, Schedule{});
  CHECK(kept.segment_ids.size() == 4);  // retained by default

  const auto merged = build_corridor(sensors, speeds, Schedule{}, {}, 0.05);
  CHECK(merged.segment_ids == std::vector<std::string>{"a", "b", "d"});
  REQUIRE(merged.observations.size() == 1);
  CHECK(merged.observations[0].y.size() == 3);
}

TEST_CASE("distance override replaces the geometry") {
  const auto sensors = three_sensors();
  const std::vector<std::string> stamps = {"2019-01-02T14:00"};
  const auto speeds = speeds_for(stamps, {{30.0, 30.0, 30.0}});
  const auto data =
      build_corridor(sensors, speeds, Schedule{}, {0.5, 0.25, 0.25});
  CHECK(data.distances_mi == std::vector<double>{0.5, 0.25, 0.25});
  CHECK(data.observations[0].y[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simulate_corridor with a near-unit discount keeps the environment flat") {
  const HyperParams hyper(1.0, 0.999);
  const CorridorModel model({1.0, 1.0});
  Rng rng(5);
  const auto sim = simulate_corridor(hyper, model, 300, GammaState(1e4, 1e4), rng);
  const double mu = testsupport::mean(sim.eta_path);
  double sd = std::sqrt(testsupport::variance(sim.eta_path));
  CHECK(sd / mu < 0.05);
}

TEST_CASE("simulate_corridor satisfies the model's mean identity") {
  const HyperParams hyper(1.7, 0.6);
  const CorridorModel model({0.5, 1.0, 1.5, 2.0});
  Rng rng(6);
  const std::size_t T = 2000;
  const auto sim = simulate_corridor(hyper, model, T, GammaState(2.5, 2.5), rng);
  REQUIRE(sim.observations.size() == T);
  REQUIRE(sim.eta_path.size() == T);
  // E[y * lambda * eta | eta] = alpha for every segment.
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < model.size(); ++j) {
      acc += sim.observations[t].y[j] * model.lambdas()[j] * sim.eta_path[t];
      ++count;
    }
  }
  const double se = std::sqrt(hyper.alpha / static_cast<double>(count));
  CHECK(acc / static_cast<double>(count) ==
        doctest::Approx(hyper.alpha).epsilon(5.0 * se / hyper.alpha));
}

TEST_CASE("simulated segments are positively and equally correlated") {
  // The shared environment makes every segment pair co-move; pooled pairwise
  // correlations must be positive and close to one another. (The horizon is
  // kept short: the environment is a multiplicative martingale whose scale
  // wanders over long runs at small discount factors.)
  const HyperParams hyper(2.0, 0.6);
  const CorridorModel model(std::vector<double>(6, 1.0));
  Rng rng(8);
  const auto sim = simulate_corridor(hyper, model, 1000, GammaState(30.0, 30.0), rng);
  std::vector<std::vector<double>> cols(6);
  for (const auto& obs : sim.observations) {
    for (int j = 0; j < 6; ++j) cols[j].push_back(obs.y[j]);
  }
  std::vector<double> corrs;
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      corrs.push_back(testsupport::correlation(cols[a], cols[b]));
    }
  }
  for (double c : corrs) CHECK(c > 0.0);
  const auto [mn, mx] = std::minmax_element(corrs.begin(), corrs.end());
  CHECK(*mx - *mn < 0.3);  // near-equal across pairs
}

TEST_CASE("observations CSV round trip at six decimals") {
  const auto dir = temp_dir();
  const auto path = (dir / "obs.csv").string();
  CorridorDataset data;
  data.segment_ids = {"6030", "6031"};
  data.distances_mi = {0.8, 0.6};
  data.timestamps = {"2019-01-02T14:00", "2019-01-02T15:00"};
  for (int t = 0; t < 2; ++t) {
    ObservationRecord obs;
    obs.t = t;
    obs.y = {1.234567891 + t, 2.5 + t};
    data.observations.push_back(obs);
  }
  write_observations_csv(path, data);
  const ObservationsFile back = read_observations_csv(path);
  CHECK(back.segment_ids == data.segment_ids);
  CHECK(back.timestamps == data.timestamps);
  REQUIRE(back.observations.size() == 2);
  for (int t = 0; t < 2; ++t) {
    for (int j = 0; j < 2; ++j) {
      CHECK(back.observations[t].y[j] ==
            doctest::Approx(data.observations[t].y[j]).epsilon(1e-6));
    }
  }
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "timestamp,y_6030,y_6031");
}

TEST_CASE("sensors and speeds CSV readers") {
  const auto dir = temp_dir();
  const auto spath = (dir / "sensors.csv").string();
  {
    std::ofstream out(spath);
    out << "sensor_id,lat,lon,order\n";
    out << "6030,41.75,-87.80,1\n";
    out << "6031,41.76,-87.79,2\n";
  }
  const auto sensors = read_sensors_csv(spath);
  REQUIRE(sensors.size() == 2);
  CHECK(sensors[0].sensor_id == "6030");
  CHECK(sensors[1].order == 2);

  const auto vpath = (dir / "speeds.csv").string();
  {
    std::ofstream out(vpath);
    out << "timestamp,sensor_id,speed_mph\n";
    out << "2019-01-02T14:00,6030,31.5\n";
    out << "2019-01-02T14:00,6031,\n";  // missing reading
  }
  const auto speeds = read_speeds_csv(vpath);
  REQUIRE(speeds.size() == 2);
  CHECK(speeds[0].speed_mph.has_value());
  CHECK_FALSE(speeds[1].speed_mph.has_value());

  CHECK_THROWS_AS(read_sensors_csv((dir / "nope.csv").string()), DataError);

  const auto dpath = (dir / "distances.csv").string();
  {
    std::ofstream out(dpath);
    out << "sensor_id,distance_mi\n6030,0.853\n6031,0.632\n";
  }
  const auto dist = read_distances_csv(dpath, sensors);
  CHECK(dist == std::vector<double>{0.853, 0.632});
}

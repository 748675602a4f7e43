#include "common.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dyngam/errors.hpp"

namespace dyngam::cli {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 1099511628211ULL;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory: " + dir);
}

void write_meta(const std::string& out_dir, const std::string& command,
                const std::vector<std::string>& input_paths, nlohmann::json params) {
  nlohmann::json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& p : input_paths) inputs[p] = file_hash(p);
  meta["inputs"] = inputs;
  meta["params"] = std::move(params);
  write_json(out_dir + "/" + command + ".meta.json", meta);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

ObservationsFile load_observations(const std::string& path) {
  return read_observations_csv(path);
}

std::vector<double> route_totals(const ObservationSeries& series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& obs : series) {
    double s = 0.0;
    for (double v : obs.y) s += v;
    out.push_back(s);
  }
  return out;
}

ObservationSeries to_route_series(const ObservationSeries& series) {
  ObservationSeries out;
  out.reserve(series.size());
  for (const auto& obs : series) {
    ObservationRecord r;
    r.t = obs.t;
    double s = 0.0;
    for (double v : obs.y) s += v;
    r.y = {s};
    r.u = obs.u;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<double>> to_matrix(const ObservationSeries& series) {
  std::vector<std::vector<double>> out;
  out.reserve(series.size());
  for (const auto& obs : series) out.push_back(obs.y);
  return out;
}

}  // namespace dyngam::cli

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyngam/corridor.hpp"
#include "dyngam/dataio.hpp"

namespace dyngam::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Six significant digits for every floating value the CLI emits; keeps golden
/// files stable across platforms.
std::string fmt(double v);

/// FNV-1a over the file bytes, rendered as "fnv1a:<hex>".
std::string file_hash(const std::string& path);

void ensure_out_dir(const std::string& dir);

/// Every command writes <command>.meta.json recording inputs, seed, and
/// version so a run can be reproduced bit for bit.
void write_meta(const std::string& out_dir, const std::string& command,
                const std::vector<std::string>& input_paths, nlohmann::json params);

void write_json(const std::string& path, const nlohmann::json& j);

/// Shared observation loading: everything downstream consumes the series plus
/// its segment ids.
ObservationsFile load_observations(const std::string& path);

/// Route sums of a series (minutes).
std::vector<double> route_totals(const ObservationSeries& series);

/// Collapse an m-segment series to scalar route records.
ObservationSeries to_route_series(const ObservationSeries& series);

/// Segment matrix view (rows = time, columns = segments).
std::vector<std::vector<double>> to_matrix(const ObservationSeries& series);

}  // namespace dyngam::cli

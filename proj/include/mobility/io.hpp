#pragma once

#include <string>
#include <vector>

#include "mobility/geo.hpp"

namespace mobility {

/// `antenna_id,lon,lat` with header. Population starts at 0.
AntennaRegistry load_antennas(const std::string& path);

/// `lon,lat,density` with header; grid spacing read from the sidecar JSON
/// (same path with extension replaced by .json, key "spacing_deg").
PopulationRaster load_population_raster(const std::string& path);

/// `antenna_id,region_label` with header.
PartitionScheme load_partition(const std::string& path, const std::string& name);

struct EventLoadResult {
    std::vector<Trajectory> trajectories;  // sorted by user_id
    long dropped_unknown_antenna = 0;
};

/// `timestamp,user_id,antenna_id` with header. Events grouped per user and
/// stable-sorted by timestamp; events naming unknown antennas are dropped
/// and counted.
EventLoadResult load_events(const std::string& path, const AntennaRegistry& reg);

/// GeoJSON FeatureCollection: one Polygon per antenna, properties
/// `antenna_id` and `population`.
std::string tessellation_geojson(const VoronoiTessellation& tess,
                                 const AntennaRegistry& reg);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// FNV-1a 64 over file bytes, hex string; used for provenance blocks.
std::string file_digest(const std::string& path);

}  // namespace mobility

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mobility {

constexpr double kEarthRadiusKm = 6371.0;

struct LonLat {
    double lon = 0.0;  // degrees, [-180, 180]
    double lat = 0.0;  // degrees, [-90, 90]
};

struct XY {
    double x = 0.0;  // km east
    double y = 0.0;  // km north
};

/// Great-circle distance in km (Earth radius 6371.0 km).
double haversine_km(const LonLat& a, const LonLat& b);

/// Local equirectangular projection about a reference point; used for all
/// planar geometry (Voronoi, gyration). Distances come out in km.
class Projection {
public:
    explicit Projection(LonLat origin);
    XY project(const LonLat& p) const;
    LonLat unproject(const XY& p) const;
    LonLat origin() const { return origin_; }

private:
    LonLat origin_;
    double cos_lat0_;
};

using Polygon = std::vector<LonLat>;    // closed implicitly, no repeated last vertex
using PolygonXY = std::vector<XY>;

double polygon_area(const PolygonXY& poly);  // shoelace, signed-abs, km^2
bool point_in_polygon(const PolygonXY& poly, const XY& p);

struct AntennaSite {
    std::string antenna_id;
    double lon = 0.0;
    double lat = 0.0;
    double population = 0.0;
};

struct AntennaRegistry {
    std::vector<AntennaSite> sites;
    Polygon bounding_region;

    const AntennaSite& site(int idx) const { return sites[idx]; }
    int size() const { return static_cast<int>(sites.size()); }
    /// -1 when unknown.
    int index_of(const std::string& antenna_id) const;
    LonLat position(int idx) const { return {sites[idx].lon, sites[idx].lat}; }
    LonLat centroid() const;
    void rebuild_index();

    /// Axis-aligned bounding box of the sites expanded by margin_deg on each side.
    static Polygon default_bounding_box(const std::vector<AntennaSite>& sites,
                                        double margin_deg = 0.25);

private:
    std::unordered_map<std::string, int> index_;
};

/// Validates invariants (coordinate ranges, unique ids) and builds the lookup
/// index. Throws ValidationError.
AntennaRegistry make_registry(std::vector<AntennaSite> sites,
                              Polygon bounding_region = {});

struct CollapseResult {
    AntennaRegistry registry;
    // old antenna_id -> surviving (lexicographically smallest) id
    std::unordered_map<std::string, std::string> id_mapping;
};

/// Merges sites within tol_meters of each other (transitive closure) into one
/// site at their centroid, keeping the lexicographically smallest id.
CollapseResult collapse_colocated(const AntennaRegistry& reg, double tol_meters);

struct VoronoiTessellation {
    std::vector<std::string> antenna_ids;              // registry order
    std::vector<Polygon> cells;                        // lon/lat vertices
    std::set<std::pair<int, int>> neighbor_pairs;      // i < j, shared edge
    Projection projection{LonLat{}};

    PolygonXY cell_xy(int idx) const;
};

/// Planar Voronoi diagram in the registry-centroid equirectangular projection,
/// clipped to the bounding region. Requires >= 2 distinct positions.
VoronoiTessellation build_voronoi(const AntennaRegistry& reg);

struct PopulationRaster {
    std::vector<LonLat> points;
    std::vector<double> densities;  // persons per km^2
    double spacing_deg = 0.0;
};

/// Sums density * sample-cell-area over raster points inside each Voronoi
/// cell (equivalently: nearest site in projected coordinates). Points outside
/// the bounding region are dropped and counted.
struct PopulationAssignment {
    AntennaRegistry registry;   // populations filled in
    double total_assigned = 0.0;
    long points_outside = 0;
};
PopulationAssignment assign_population(const VoronoiTessellation& tess,
                                       const AntennaRegistry& reg,
                                       const PopulationRaster& grid);

struct PartitionScheme {
    std::string name;
    std::unordered_map<std::string, std::string> assignment;  // antenna_id -> region label

    const std::string& region_of(const std::string& antenna_id) const;
    /// Throws ValidationError unless every registry antenna is labeled and
    /// there are >= 2 distinct labels.
    void validate(const AntennaRegistry& reg) const;
};

struct CdrEvent {
    std::int64_t timestamp = 0;  // Unix seconds, UTC
    int antenna = -1;            // registry index
};

struct Trajectory {
    std::string user_id;
    std::vector<CdrEvent> events;  // ascending timestamp, input order on ties
};

}  // namespace mobility

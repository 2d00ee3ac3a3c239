#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mobility/errors.hpp"
#include "mobility/geo.hpp"
#include "mobility/io.hpp"

using namespace mobility;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path.string();
}

AntennaRegistry square_registry() {
    // unit square corners inside a side-2 box centered on them
    std::vector<AntennaSite> sites{{"A", -0.5, -0.5, 0},
                                   {"B", 0.5, -0.5, 0},
                                   {"C", -0.5, 0.5, 0},
                                   {"D", 0.5, 0.5, 0}};
    Polygon box{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    return make_registry(sites, box);
}

}  // namespace

TEST_CASE("haversine") {
    CHECK(haversine_km({12.5, 41.9}, {12.5, 41.9}) == 0.0);
    // quarter meridian
    CHECK(haversine_km({0, 0}, {0, 90}) == doctest::Approx(10007.54).epsilon(1e-5));
    CHECK(haversine_km({0, 0}, {90, 0}) ==
          doctest::Approx(haversine_km({0, 0}, {0, 90})));
    // symmetry and positivity on random pairs
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lon(-180, 180), lat(-80, 80);
    for (int i = 0; i < 50; ++i) {
        LonLat a{lon(rng), lat(rng)}, b{lon(rng), lat(rng)};
        CHECK(haversine_km(a, b) == doctest::Approx(haversine_km(b, a)));
        CHECK(haversine_km(a, b) >= 0.0);
    }
}

TEST_CASE("load_antennas basics") {
    const auto path = write_temp("ants_ok.csv", "antenna_id,lon,lat\nA,1.0,2.0\nB,1.5,2.5\n");
    const auto reg = load_antennas(path);
    CHECK(reg.size() == 2);
    CHECK(reg.index_of("A") == 0);
    CHECK(reg.site(0).population == 0.0);

    const auto bad = write_temp("ants_bad.csv", "antenna_id,lon,lat\nA,1.0,95\nB,1,2\n");
    CHECK_THROWS_AS((void)load_antennas(bad), ValidationError);

    const auto dup = write_temp("ants_dup.csv", "antenna_id,lon,lat\nA,1,2\nA,3,4\n");
    CHECK_THROWS_AS((void)load_antennas(dup), ValidationError);

    const auto garbled = write_temp("ants_garbled.csv", "antenna_id,lon,lat\nA,x,2\n");
    CHECK_THROWS_AS((void)load_antennas(garbled), ParseError);
}

TEST_CASE("collapse_colocated") {
    std::vector<AntennaSite> sites{{"B", 10.0, 5.0, 0},
                                   {"A", 10.0, 5.0, 0},
                                   {"C", 10.1, 5.0, 0}};
    auto reg = make_registry(sites);

    SUBCASE("identical positions merge, keeping the smallest id") {
        const auto res = collapse_colocated(reg, 1.0);
        CHECK(res.registry.size() == 2);
        CHECK(res.registry.index_of("A") >= 0);
        CHECK(res.registry.index_of("B") == -1);
        CHECK(res.id_mapping.at("B") == "A");
        CHECK(res.id_mapping.at("C") == "C");
    }

    SUBCASE("sites far apart are untouched") {
        std::vector<AntennaSite> far{{"A", 10.0, 5.0, 0}, {"B", 10.005, 5.0, 0}};
        const auto res = collapse_colocated(make_registry(far), 1.0);
        CHECK(res.registry.size() == 2);  // ~550 m apart
    }

    SUBCASE("idempotent") {
        const auto once = collapse_colocated(reg, 1.0);
        const auto twice = collapse_colocated(once.registry, 1.0);
        CHECK(twice.registry.size() == once.registry.size());
        for (int i = 0; i < once.registry.size(); ++i)
            CHECK(twice.registry.site(i).antenna_id ==
                  once.registry.site(i).antenna_id);
    }
}

TEST_CASE("voronoi: two sites split by the perpendicular bisector") {
    std::vector<AntennaSite> sites{{"L", -0.5, 0.0, 0}, {"R", 0.5, 0.0, 0}};
    Polygon box{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto tess = build_voronoi(make_registry(sites, box));
    CHECK(tess.cells.size() == 2);
    CHECK(tess.neighbor_pairs.count({0, 1}) == 1);
    // every cell vertex of L is weakly left of lon 0
    for (const auto& v : tess.cells[0]) CHECK(v.lon <= 1e-9);
    const double a0 = polygon_area(tess.cell_xy(0));
    const double a1 = polygon_area(tess.cell_xy(1));
    CHECK(a0 == doctest::Approx(a1).epsilon(1e-9));
}

TEST_CASE("voronoi: four-corner symmetry") {
    const auto tess = build_voronoi(square_registry());
    std::vector<double> areas;
    for (int i = 0; i < 4; ++i) areas.push_back(polygon_area(tess.cell_xy(i)));
    for (int i = 1; i < 4; ++i) CHECK(areas[i] == doctest::Approx(areas[0]).epsilon(1e-9));
    CHECK(tess.neighbor_pairs.size() == 4);  // no diagonal adjacency
}

TEST_CASE("voronoi: areas sum to the bounding region") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    std::vector<AntennaSite> sites;
    for (int i = 0; i < 50; ++i)
        sites.push_back({"S" + std::to_string(100 + i), u(rng), u(rng), 0});
    Polygon box{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto reg = make_registry(sites, box);
    const auto tess = build_voronoi(reg);

    double total = 0.0;
    for (int i = 0; i < 50; ++i) total += polygon_area(tess.cell_xy(i));
    PolygonXY box_xy;
    for (const auto& p : box) box_xy.push_back(tess.projection.project(p));
    CHECK(total == doctest::Approx(polygon_area(box_xy)).epsilon(1e-6));
}

TEST_CASE("voronoi: cells contain exactly the nearest points") {
    const auto reg = square_registry();
    const auto tess = build_voronoi(reg);
    std::vector<PolygonXY> cells;
    for (int i = 0; i < 4; ++i) cells.push_back(tess.cell_xy(i));
    std::vector<XY> sites;
    for (int i = 0; i < 4; ++i) sites.push_back(tess.projection.project(reg.position(i)));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.99, 0.99);
    for (int k = 0; k < 400; ++k) {
        const XY p = tess.projection.project({u(rng), u(rng)});
        int nearest = 0;
        double best = 1e300;
        for (int i = 0; i < 4; ++i) {
            const double d = std::hypot(sites[i].x - p.x, sites[i].y - p.y);
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        int container = -1;
        for (int i = 0; i < 4; ++i)
            if (point_in_polygon(cells[i], p)) container = i;
        if (container >= 0) CHECK(container == nearest);
    }
}

TEST_CASE("voronoi: degenerate input") {
    std::vector<AntennaSite> sites{{"A", 1, 1, 0}, {"B", 1, 1, 0}};
    CHECK_THROWS_AS((void)build_voronoi(make_registry(sites)), ValidationError);
}

TEST_CASE("assign_population: uniform split") {
    std::vector<AntennaSite> sites{{"L", -0.05, 0.0, 0}, {"R", 0.05, 0.0, 0}};
    Polygon box{{-0.1, -0.1}, {0.1, -0.1}, {0.1, 0.1}, {-0.1, 0.1}};
    const auto reg = make_registry(sites, box);
    const auto tess = build_voronoi(reg);

    PopulationRaster raster;
    raster.spacing_deg = 0.01;
    for (double lon = -0.095; lon < 0.1; lon += 0.01)
        for (double lat = -0.095; lat < 0.1; lat += 0.01) {
            raster.points.push_back({lon, lat});
            raster.densities.push_back(1.0);
        }
    const auto res = assign_population(tess, reg, raster);
    CHECK(res.points_outside == 0);
    CHECK(res.registry.site(0).population ==
          doctest::Approx(res.registry.site(1).population).epsilon(1e-9));
    CHECK(res.registry.site(0).population + res.registry.site(1).population ==
          doctest::Approx(res.total_assigned));
    // density 1/km^2 over the whole box splits evenly
    CHECK(res.total_assigned > 0.0);
}

TEST_CASE("assign_population: point mass goes to the containing cell") {
    const auto reg = square_registry();
    const auto tess = build_voronoi(reg);
    PopulationRaster raster;
    raster.spacing_deg = 0.01;
    raster.points.push_back({-0.5, -0.5});  // exactly at site A
    raster.densities.push_back(42.0);
    const auto res = assign_population(tess, reg, raster);
    CHECK(res.registry.site(reg.index_of("A")).population == doctest::Approx(res.total_assigned));
    CHECK(res.registry.site(reg.index_of("B")).population == 0.0);
}

TEST_CASE("assign_population: matches point-in-polygon brute force") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    std::vector<AntennaSite> sites;
    for (int i = 0; i < 20; ++i)
        sites.push_back({"S" + std::to_string(10 + i), u(rng), u(rng), 0});
    Polygon box{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const auto reg = make_registry(sites, box);
    const auto tess = build_voronoi(reg);

    PopulationRaster raster;
    raster.spacing_deg = 0.04;
    for (double lon = -0.98; lon < 1.0; lon += 0.04)
        for (double lat = -0.98; lat < 1.0; lat += 0.04) {
            // two-Gaussian landscape
            const double d1 = (lon - 0.3) * (lon - 0.3) + (lat - 0.3) * (lat - 0.3);
            const double d2 = (lon + 0.4) * (lon + 0.4) + (lat + 0.2) * (lat + 0.2);
            raster.points.push_back({lon, lat});
            raster.densities.push_back(std::exp(-d1 / 0.05) + 2.0 * std::exp(-d2 / 0.1));
        }
    const auto res = assign_population(tess, reg, raster);

    // oracle: accumulate by point-in-polygon over the actual cells
    std::vector<double> oracle(20, 0.0);
    std::vector<PolygonXY> cells;
    for (int i = 0; i < 20; ++i) cells.push_back(tess.cell_xy(i));
    const double dr = raster.spacing_deg * (3.14159265358979323846 / 180.0) * kEarthRadiusKm;
    for (size_t k = 0; k < raster.points.size(); ++k) {
        const XY p = tess.projection.project(raster.points[k]);
        const double area = dr * dr * std::cos(raster.points[k].lat * 3.14159265358979323846 / 180.0);
        for (int i = 0; i < 20; ++i)
            if (point_in_polygon(cells[i], p)) {
                oracle[i] += raster.densities[k] * area;
                break;
            }
    }
    double oracle_total = 0.0;
    for (int i = 0; i < 20; ++i) oracle_total += oracle[i];
    // population conservation against the oracle total
    CHECK(res.total_assigned == doctest::Approx(oracle_total).epsilon(1e-9));
    for (int i = 0; i < 20; ++i)
        CHECK(res.registry.site(i).population == doctest::Approx(oracle[i]).epsilon(1e-9));

    SUBCASE("empty raster rejected") {
        PopulationRaster empty;
        empty.spacing_deg = 0.1;
        CHECK_THROWS_AS((void)assign_population(tess, reg, empty), ValidationError);
    }
}

TEST_CASE("load_events: sorting, filtering, parse errors") {
    std::vector<AntennaSite> sites{{"A", 0, 0, 0}, {"B", 0.1, 0, 0}};
    const auto reg = make_registry(sites);
    const auto path = write_temp("events.csv",
                                 "timestamp,user_id,antenna_id\n"
                                 "300,u1,B\n100,u1,A\n200,u1,A\n150,u1,ZZZ\n");
    const auto res = load_events(path, reg);
    CHECK(res.trajectories.size() == 1);
    CHECK(res.dropped_unknown_antenna == 1);
    const auto& t = res.trajectories[0];
    CHECK(t.events.size() == 3);
    CHECK(t.events[0].timestamp == 100);
    CHECK(t.events[2].timestamp == 300);

    const auto bad = write_temp("events_bad.csv",
                                "timestamp,user_id,antenna_id\nnotatime,u1,A\n");
    CHECK_THROWS_AS((void)load_events(bad, reg), ParseError);
}

TEST_CASE("partition validation") {
    std::vector<AntennaSite> sites{{"A", 0, 0, 0}, {"B", 0.1, 0, 0}};
    const auto reg = make_registry(sites);
    PartitionScheme one{"one", {{"A", "X"}, {"B", "X"}}};
    CHECK_THROWS_AS(one.validate(reg), ValidationError);
    PartitionScheme missing{"missing", {{"A", "X"}}};
    CHECK_THROWS_AS(missing.validate(reg), ValidationError);
    PartitionScheme ok{"ok", {{"A", "X"}, {"B", "Y"}}};
    CHECK_NOTHROW(ok.validate(reg));
}

TEST_CASE("tessellation geojson contains every antenna") {
    const auto reg = square_registry();
    const auto tess = build_voronoi(reg);
    const auto gj = tessellation_geojson(tess, reg);
    for (const char* id : {"\"A\"", "\"B\"", "\"C\"", "\"D\""})
        CHECK(gj.find(id) != std::string::npos);
    CHECK(gj.find("FeatureCollection") != std::string::npos);
}

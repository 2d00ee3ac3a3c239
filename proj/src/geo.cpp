#include "mobility/geo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mobility/errors.hpp"

namespace mobility {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

double haversine_km(const LonLat& a, const LonLat& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlam = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlam / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Projection::Projection(LonLat origin) : origin_(origin) {
    cos_lat0_ = std::cos(origin.lat * kDegToRad);
}

XY Projection::project(const LonLat& p) const {
    return {kEarthRadiusKm * (p.lon - origin_.lon) * kDegToRad * cos_lat0_,
            kEarthRadiusKm * (p.lat - origin_.lat) * kDegToRad};
}

LonLat Projection::unproject(const XY& p) const {
    return {origin_.lon + p.x / (kEarthRadiusKm * kDegToRad * cos_lat0_),
            origin_.lat + p.y / (kEarthRadiusKm * kDegToRad)};
}

double polygon_area(const PolygonXY& poly) {
    double acc = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const XY& a = poly[i];
        const XY& b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return std::abs(acc) / 2.0;
}

bool point_in_polygon(const PolygonXY& poly, const XY& p) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const XY& a = poly[i];
        const XY& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

int AntennaRegistry::index_of(const std::string& antenna_id) const {
    auto it = index_.find(antenna_id);
    return it == index_.end() ? -1 : it->second;
}

LonLat AntennaRegistry::centroid() const {
    double lon = 0.0, lat = 0.0;
    for (const auto& s : sites) {
        lon += s.lon;
        lat += s.lat;
    }
    const double n = static_cast<double>(sites.size());
    return {lon / n, lat / n};
}

void AntennaRegistry::rebuild_index() {
    index_.clear();
    for (size_t i = 0; i < sites.size(); ++i) {
        auto [it, inserted] = index_.emplace(sites[i].antenna_id, static_cast<int>(i));
        if (!inserted)
            throw ValidationError("duplicate antenna_id: " + sites[i].antenna_id);
    }
}

Polygon AntennaRegistry::default_bounding_box(const std::vector<AntennaSite>& sites,
                                              double margin_deg) {
    double lo_lon = 1e300, hi_lon = -1e300, lo_lat = 1e300, hi_lat = -1e300;
    for (const auto& s : sites) {
        lo_lon = std::min(lo_lon, s.lon);
        hi_lon = std::max(hi_lon, s.lon);
        lo_lat = std::min(lo_lat, s.lat);
        hi_lat = std::max(hi_lat, s.lat);
    }
    lo_lon -= margin_deg;
    hi_lon += margin_deg;
    lo_lat -= margin_deg;
    hi_lat += margin_deg;
    return {{lo_lon, lo_lat}, {hi_lon, lo_lat}, {hi_lon, hi_lat}, {lo_lon, hi_lat}};
}

AntennaRegistry make_registry(std::vector<AntennaSite> sites, Polygon bounding_region) {
    if (sites.size() < 2) throw ValidationError("registry needs at least 2 sites");
    for (const auto& s : sites) {
        if (s.lon < -180.0 || s.lon > 180.0)
            throw ValidationError("lon out of range for " + s.antenna_id);
        if (s.lat < -90.0 || s.lat > 90.0)
            throw ValidationError("lat out of range for " + s.antenna_id);
        if (s.population < 0.0)
            throw ValidationError("negative population for " + s.antenna_id);
    }
    AntennaRegistry reg;
    if (bounding_region.empty())
        bounding_region = AntennaRegistry::default_bounding_box(sites);
    reg.sites = std::move(sites);
    reg.bounding_region = std::move(bounding_region);
    reg.rebuild_index();
    return reg;
}

CollapseResult collapse_colocated(const AntennaRegistry& reg, double tol_meters) {
    if (tol_meters < 0.0) throw ValidationError("tolerance must be >= 0");
    const int n = reg.size();
    const double tol_km = tol_meters / 1000.0;

    // union-find over sites within tolerance (transitive closure)
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (haversine_km(reg.position(i), reg.position(j)) <= tol_km) {
                int ra = find(i), rb = find(j);
                if (ra != rb) parent[rb] = ra;
            }

    std::unordered_map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

    std::vector<AntennaSite> merged;
    CollapseResult result;
    for (int i = 0; i < n; ++i) {
        if (find(i) != i) continue;
        const auto& members = groups[i];
        AntennaSite out;
        out.antenna_id = reg.site(members[0]).antenna_id;
        for (int m : members) {
            out.antenna_id = std::min(out.antenna_id, reg.site(m).antenna_id);
            out.lon += reg.site(m).lon;
            out.lat += reg.site(m).lat;
            out.population += reg.site(m).population;
        }
        out.lon /= static_cast<double>(members.size());
        out.lat /= static_cast<double>(members.size());
        for (int m : members)
            result.id_mapping[reg.site(m).antenna_id] = out.antenna_id;
        merged.push_back(std::move(out));
    }
    std::sort(merged.begin(), merged.end(),
              [](const AntennaSite& a, const AntennaSite& b) {
                  return a.antenna_id < b.antenna_id;
              });
    result.registry = make_registry(std::move(merged), reg.bounding_region);
    return result;
}

namespace {

// Clip a convex-or-not polygon by the half-plane of points closer to a than b.
PolygonXY clip_halfplane(const PolygonXY& poly, const XY& a, const XY& b) {
    // half-plane: dot(p - mid, a - b) >= 0
    const double mx = (a.x + b.x) / 2.0, my = (a.y + b.y) / 2.0;
    const double nx = a.x - b.x, ny = a.y - b.y;
    auto side = [&](const XY& p) { return (p.x - mx) * nx + (p.y - my) * ny; };
    PolygonXY out;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const XY& cur = poly[i];
        const XY& nxt = poly[(i + 1) % n];
        const double sc = side(cur), sn = side(nxt);
        if (sc >= 0.0) out.push_back(cur);
        if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
            const double t = sc / (sc - sn);
            out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
        }
    }
    return out;
}

}  // namespace

PolygonXY VoronoiTessellation::cell_xy(int idx) const {
    PolygonXY out;
    out.reserve(cells[idx].size());
    for (const auto& p : cells[idx]) out.push_back(projection.project(p));
    return out;
}

VoronoiTessellation build_voronoi(const AntennaRegistry& reg) {
    const int n = reg.size();
    if (n < 2) throw ValidationError("voronoi needs >= 2 sites");

    VoronoiTessellation tess;
    tess.projection = Projection(reg.centroid());

    std::vector<XY> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = tess.projection.project(reg.position(i));

    bool any_distinct = false;
    for (int i = 1; i < n && !any_distinct; ++i)
        if (std::hypot(pts[i].x - pts[0].x, pts[i].y - pts[0].y) > 1e-12)
            any_distinct = true;
    if (!any_distinct) throw ValidationError("all sites coincident; cannot tessellate");

    PolygonXY bbox;
    for (const auto& p : reg.bounding_region) bbox.push_back(tess.projection.project(p));

    tess.antenna_ids.resize(n);
    tess.cells.resize(n);

    for (int i = 0; i < n; ++i) {
        tess.antenna_ids[i] = reg.site(i).antenna_id;

        // neighbors sorted by distance; stop once the bisector cannot cut
        std::vector<int> order;
        order.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = std::hypot(pts[a].x - pts[i].x, pts[a].y - pts[i].y);
            const double db = std::hypot(pts[b].x - pts[i].x, pts[b].y - pts[i].y);
            return da < db;
        });

        PolygonXY cell = bbox;
        for (int j : order) {
            const double dij = std::hypot(pts[j].x - pts[i].x, pts[j].y - pts[i].y);
            if (dij < 1e-12)
                throw ValidationError("coincident sites " + reg.site(i).antenna_id +
                                      " and " + reg.site(j).antenna_id +
                                      "; run collapse_colocated first");
            double max_r = 0.0;
            for (const auto& v : cell)
                max_r = std::max(max_r, std::hypot(v.x - pts[i].x, v.y - pts[i].y));
            if (dij / 2.0 > max_r) break;
            cell = clip_halfplane(cell, pts[i], pts[j]);
            if (cell.empty()) break;
        }
        Polygon cell_ll;
        cell_ll.reserve(cell.size());
        for (const auto& v : cell) cell_ll.push_back(tess.projection.unproject(v));
        tess.cells[i] = std::move(cell_ll);
    }

    // neighbor pairs: an edge midpoint is equidistant to exactly the two
    // adjacent sites (boundary edges have a unique nearest site and are skipped)
    for (int i = 0; i < n; ++i) {
        const PolygonXY cell = tess.cell_xy(i);
        const size_t m = cell.size();
        for (size_t e = 0; e < m; ++e) {
            const XY& a = cell[e];
            const XY& b = cell[(e + 1) % m];
            const XY mid{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
            double d1 = 1e300, d2 = 1e300;
            int n1 = -1, n2 = -1;
            for (int j = 0; j < n; ++j) {
                const double d = std::hypot(pts[j].x - mid.x, pts[j].y - mid.y);
                if (d < d1) {
                    d2 = d1;
                    n2 = n1;
                    d1 = d;
                    n1 = j;
                } else if (d < d2) {
                    d2 = d;
                    n2 = j;
                }
            }
            if (n1 < 0 || n2 < 0) continue;
            if ((n1 == i || n2 == i) && d2 - d1 < 1e-6 * (1.0 + d1)) {
                const int other = (n1 == i) ? n2 : n1;
                tess.neighbor_pairs.insert({std::min(i, other), std::max(i, other)});
            }
        }
    }
    return tess;
}

PopulationAssignment assign_population(const VoronoiTessellation& tess,
                                       const AntennaRegistry& reg,
                                       const PopulationRaster& grid) {
    if (grid.points.empty()) throw ValidationError("population raster is empty");
    if (grid.spacing_deg <= 0.0) throw ValidationError("raster spacing must be > 0");

    const int n = reg.size();
    std::vector<XY> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = tess.projection.project(reg.position(i));

    PolygonXY bbox;
    for (const auto& p : reg.bounding_region) bbox.push_back(tess.projection.project(p));

    PopulationAssignment out;
    out.registry = reg;
    for (auto& s : out.registry.sites) s.population = 0.0;

    const double dr = grid.spacing_deg * kDegToRad * kEarthRadiusKm;
    for (size_t k = 0; k < grid.points.size(); ++k) {
        const XY p = tess.projection.project(grid.points[k]);
        if (!point_in_polygon(bbox, p)) {
            ++out.points_outside;
            continue;
        }
        // area of the raster sample cell at this latitude, km^2
        const double area = dr * dr * std::cos(grid.points[k].lat * kDegToRad);
        int best = 0;
        double best_d = 1e300;
        for (int i = 0; i < n; ++i) {
            const double d = std::hypot(pts[i].x - p.x, pts[i].y - p.y);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        const double mass = grid.densities[k] * area;
        out.registry.sites[best].population += mass;
        out.total_assigned += mass;
    }
    return out;
}

const std::string& PartitionScheme::region_of(const std::string& antenna_id) const {
    auto it = assignment.find(antenna_id);
    if (it == assignment.end())
        throw ValidationError("partition '" + name + "' missing antenna " + antenna_id);
    return it->second;
}

void PartitionScheme::validate(const AntennaRegistry& reg) const {
    std::set<std::string> labels;
    for (const auto& s : reg.sites) labels.insert(region_of(s.antenna_id));
    if (labels.size() < 2)
        throw ValidationError("partition '" + name + "' has fewer than 2 labels");
}

}  // namespace mobility

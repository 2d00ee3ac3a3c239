#include "mobility/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mobility/errors.hpp"

namespace mobility {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, long line, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("cannot parse ") + what + " '" + s + "'", line);
    }
}

std::int64_t parse_int64(const std::string& s, long line, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(std::string("cannot parse ") + what + " '" + s + "'", line);
    return v;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    return in;
}

}  // namespace

AntennaRegistry load_antennas(const std::string& path) {
    auto in = open_or_throw(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty antennas file", 1);
    ++lineno;

    std::vector<AntennaSite> sites;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) throw ParseError("expected 3 fields", lineno);
        AntennaSite s;
        s.antenna_id = f[0];
        s.lon = parse_double(f[1], lineno, "lon");
        s.lat = parse_double(f[2], lineno, "lat");
        sites.push_back(std::move(s));
    }
    return make_registry(std::move(sites));
}

PopulationRaster load_population_raster(const std::string& path) {
    auto in = open_or_throw(path);

    std::string sidecar = path;
    auto dot = sidecar.rfind('.');
    if (dot != std::string::npos) sidecar = sidecar.substr(0, dot);
    sidecar += ".json";
    std::ifstream sj(sidecar);
    if (!sj) throw ValidationError("missing raster sidecar: " + sidecar);
    nlohmann::json meta;
    try {
        sj >> meta;
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad sidecar JSON: ") + e.what(), 1);
    }
    if (!meta.contains("spacing_deg"))
        throw ValidationError("sidecar missing spacing_deg: " + sidecar);

    PopulationRaster raster;
    raster.spacing_deg = meta["spacing_deg"].get<double>();

    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ValidationError("population raster is empty");
    ++lineno;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) throw ParseError("expected 3 fields", lineno);
        raster.points.push_back({parse_double(f[0], lineno, "lon"),
                                 parse_double(f[1], lineno, "lat")});
        raster.densities.push_back(parse_double(f[2], lineno, "density"));
    }
    if (raster.points.empty()) throw ValidationError("population raster is empty");
    return raster;
}

PartitionScheme load_partition(const std::string& path, const std::string& name) {
    auto in = open_or_throw(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty partition file", 1);
    ++lineno;
    PartitionScheme scheme;
    scheme.name = name;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) throw ParseError("expected 2 fields", lineno);
        auto [it, inserted] = scheme.assignment.emplace(f[0], f[1]);
        if (!inserted && it->second != f[1])
            throw ValidationError("conflicting labels for antenna " + f[0]);
    }
    return scheme;
}

EventLoadResult load_events(const std::string& path, const AntennaRegistry& reg) {
    auto in = open_or_throw(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty events file", 1);
    ++lineno;

    std::map<std::string, std::vector<CdrEvent>> by_user;
    EventLoadResult out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) throw ParseError("expected 3 fields", lineno);
        const std::int64_t ts = parse_int64(f[0], lineno, "timestamp");
        const int idx = reg.index_of(f[2]);
        if (idx < 0) {
            ++out.dropped_unknown_antenna;
            continue;
        }
        by_user[f[1]].push_back({ts, idx});
    }
    out.trajectories.reserve(by_user.size());
    for (auto& [user, events] : by_user) {
        std::stable_sort(events.begin(), events.end(),
                         [](const CdrEvent& a, const CdrEvent& b) {
                             return a.timestamp < b.timestamp;
                         });
        out.trajectories.push_back({user, std::move(events)});
    }
    return out;
}

std::string tessellation_geojson(const VoronoiTessellation& tess,
                                 const AntennaRegistry& reg) {
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = nlohmann::json::array();
    for (size_t i = 0; i < tess.cells.size(); ++i) {
        nlohmann::json ring = nlohmann::json::array();
        for (const auto& p : tess.cells[i]) ring.push_back({p.lon, p.lat});
        if (!tess.cells[i].empty())
            ring.push_back({tess.cells[i][0].lon, tess.cells[i][0].lat});
        nlohmann::json feat;
        feat["type"] = "Feature";
        feat["geometry"] = {{"type", "Polygon"},
                            {"coordinates", nlohmann::json::array({ring})}};
        const int idx = reg.index_of(tess.antenna_ids[i]);
        feat["properties"] = {{"antenna_id", tess.antenna_ids[i]},
                              {"population", idx >= 0 ? reg.site(idx).population : 0.0}};
        fc["features"].push_back(std::move(feat));
    }
    return fc.dump(2);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_digest(const std::string& path) {
    const std::string data = read_file(path);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mobility

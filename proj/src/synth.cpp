#include "mobility/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mobility/errors.hpp"
#include "mobility/geo.hpp"
#include "mobility/io.hpp"

namespace mobility {

namespace {

// all randomness below is hand-rolled on top of mt19937_64 so that output is
// identical across standard libraries
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double u01() { return (gen() >> 11) * (1.0 / 9007199254740992.0); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
    int uniform_int(int n) { return static_cast<int>(gen() % static_cast<unsigned>(n)); }

    double normal(double mean, double sd) {
        double u1 = u01(), u2 = u01();
        while (u1 <= 1e-300) u1 = u01();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    int poisson(double lambda) {
        const double limit = std::exp(-lambda);
        double prod = u01();
        int k = 0;
        while (prod > limit) {
            prod *= u01();
            ++k;
        }
        return k;
    }

    double truncated_power_law(double r0, double beta, double kappa) {
        // Pareto envelope, exponential acceptance (beta > 1 assumed here)
        for (;;) {
            const double u = u01();
            const double x = r0 * (std::pow(1.0 - u, -1.0 / (beta - 1.0)) - 1.0);
            if (u01() <= std::exp(-x / kappa)) return x;
        }
    }
};

std::string antenna_name(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A%04d", idx);
    return buf;
}

std::string user_name(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "U%05d", idx);
    return buf;
}

struct Layout {
    std::vector<LonLat> region_centers;
    std::vector<double> region_weights;       // gravity masses for destination choice
    std::vector<int> antenna_region;
    std::vector<int> antenna_sub;             // global sub index
    std::vector<LonLat> antenna_pos;
    long colocated_redundancy = 0;
};

constexpr double kLonMin = -6.0, kLonMax = -2.0, kLatMin = 5.0, kLatMax = 9.0;

Layout build_layout(const SocietySpec& spec, Rng& rng) {
    Layout lay;
    const int nr = spec.n_level1_regions;
    const int ns = spec.n_subcommunities_per_region;
    if (spec.n_antennas < nr * ns)
        throw ValidationError("more subcommunities than antennas");

    // region centers on a jittered grid over the country box
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nr))));
    for (int r = 0; r < nr; ++r) {
        const int gx = r % grid, gy = r / grid;
        const double lon = kLonMin + (kLonMax - kLonMin) * (gx + 0.5) / grid +
                           rng.uniform(-0.1, 0.1);
        const double lat = kLatMin + (kLatMax - kLatMin) * (gy + 0.5) / grid +
                           rng.uniform(-0.1, 0.1);
        lay.region_centers.push_back({lon, lat});
        double w = 0.8 + 0.4 * rng.u01();
        if (r == 0) w *= spec.capital_population_factor;
        lay.region_weights.push_back(w);
    }

    // subcommunity centers scattered inside each region
    std::vector<LonLat> sub_centers(static_cast<size_t>(nr) * ns);
    for (int r = 0; r < nr; ++r)
        for (int s = 0; s < ns; ++s)
            sub_centers[static_cast<size_t>(r) * ns + s] = {
                lay.region_centers[r].lon + rng.normal(0.0, 0.10),
                lay.region_centers[r].lat + rng.normal(0.0, 0.10)};

    // antennas in close pairs so every antenna has a sub-km neighbor
    lay.antenna_pos.resize(spec.n_antennas);
    lay.antenna_region.resize(spec.n_antennas);
    lay.antenna_sub.resize(spec.n_antennas);
    for (int a = 0; a < spec.n_antennas; ++a) {
        const int sub = (a / 2) % (nr * ns);  // pair twins share a subcommunity
        lay.antenna_sub[a] = sub;
        lay.antenna_region[a] = sub / ns;
        if (a % 2 == 0 || a == spec.n_antennas - 1) {
            lay.antenna_pos[a] = {sub_centers[sub].lon + rng.normal(0.0, 0.025),
                                  sub_centers[sub].lat + rng.normal(0.0, 0.025)};
        } else {
            // twin of the previous antenna, 0.3-0.8 km away
            const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const double d_deg = rng.uniform(0.003, 0.007);
            lay.antenna_pos[a] = {lay.antenna_pos[a - 1].lon + d_deg * std::cos(ang),
                                  lay.antenna_pos[a - 1].lat + d_deg * std::sin(ang)};
        }
    }
    return lay;
}

void plant_colocated_groups(const SocietySpec& spec, Layout& lay, Rng& rng,
                            int n_groups) {
    // snap runs of 2-3 consecutive antennas to identical coordinates
    int a = 0;
    for (int g = 0; g < n_groups && a + 2 < spec.n_antennas; ++g) {
        const int size = 2 + (rng.u01() < 0.5 ? 1 : 0);
        for (int m = 1; m < size && a + m < spec.n_antennas; ++m) {
            lay.antenna_pos[a + m] = lay.antenna_pos[a];
            ++lay.colocated_redundancy;
        }
        a += size + 3;
    }
}

struct Event {
    std::int64_t ts;
    int user;
    int antenna;
};

}  // namespace

SocietyBundle generate_society(const SocietySpec& spec) {
    if (spec.n_level1_regions < 1 || spec.n_subcommunities_per_region < 1 ||
        spec.n_antennas < 2 || spec.n_users < 1 || spec.days < 1)
        throw ValidationError("all counts must be >= 1");
    if (spec.intra_affinity_rho < 0.0 || spec.intra_affinity_rho > 1.0)
        throw ValidationError("rho must lie in [0, 1]");

    Rng layout_rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    Layout lay = build_layout(spec, layout_rng);
    if (spec.n_colocated_groups > 0)
        plant_colocated_groups(spec, lay, layout_rng, spec.n_colocated_groups);

    const int n_ant = spec.n_antennas;
    const int nr = spec.n_level1_regions;

    // pairwise antenna distances (km); modest n keeps this dense
    std::vector<double> adist(static_cast<size_t>(n_ant) * n_ant, 0.0);
    for (int i = 0; i < n_ant; ++i)
        for (int j = i + 1; j < n_ant; ++j) {
            const double d = haversine_km(lay.antenna_pos[i], lay.antenna_pos[j]);
            adist[static_cast<size_t>(i) * n_ant + j] = d;
            adist[static_cast<size_t>(j) * n_ant + i] = d;
        }

    // region centroid distances for the gravity destination kernel
    std::vector<double> rdist(static_cast<size_t>(nr) * nr, 0.0);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nr; ++j)
            if (i != j)
                rdist[static_cast<size_t>(i) * nr + j] =
                    haversine_km(lay.region_centers[i], lay.region_centers[j]);

    std::vector<std::vector<int>> region_antennas(nr);
    for (int a = 0; a < n_ant; ++a) region_antennas[lay.antenna_region[a]].push_back(a);

    auto nearest_in_region = [&](int from) {
        int best = -1;
        double best_d = 1e300;
        for (int a : region_antennas[lay.antenna_region[from]]) {
            if (a == from) continue;
            const double d = adist[static_cast<size_t>(from) * n_ant + a];
            if (d < best_d) {
                best_d = d;
                best = a;
            }
        }
        return best;
    };

    auto pick_in_region_by_jump = [&](int from, int region, Rng& rng) {
        const double want =
            rng.truncated_power_law(spec.jump_delta_r0_km, spec.jump_beta,
                                    spec.jump_kappa_km);
        int best = -1;
        double best_err = 1e300;
        for (int a : region_antennas[region]) {
            if (a == from) continue;
            const double err =
                std::abs(adist[static_cast<size_t>(from) * n_ant + a] - want);
            if (err < best_err) {
                best_err = err;
                best = a;
            }
        }
        return best;
    };

    auto pick_region = [&](int from_region, Rng& rng) {
        // gravity kernel over foreign regions
        std::vector<double> w(nr, 0.0);
        double total = 0.0;
        for (int r = 0; r < nr; ++r) {
            if (r == from_region) continue;
            const double d = rdist[static_cast<size_t>(from_region) * nr + r];
            w[r] = std::pow(lay.region_weights[from_region], spec.alpha) *
                   std::pow(lay.region_weights[r], spec.beta_g) /
                   std::pow(d, spec.gamma);
            total += w[r];
        }
        double u = rng.u01() * total;
        for (int r = 0; r < nr; ++r) {
            if (r == from_region) continue;
            u -= w[r];
            if (u <= 0.0) return r;
        }
        return (from_region + 1) % nr;
    };

    // homes follow the planted population weights so that observed flux
    // actually tracks the raster the flux models will be fed
    std::vector<double> cum_weight(nr, 0.0);
    {
        double acc = 0.0;
        for (int r = 0; r < nr; ++r) {
            acc += lay.region_weights[r];
            cum_weight[r] = acc;
        }
    }
    auto pick_home_region = [&](Rng& rng) {
        const double u = rng.u01() * cum_weight[nr - 1];
        for (int r = 0; r < nr; ++r)
            if (u <= cum_weight[r]) return r;
        return nr - 1;
    };

    std::vector<Event> events;
    GroundTruthManifest manifest;
    nlohmann::json trips_json = nlohmann::json::array();

    for (int u = 0; u < spec.n_users; ++u) {
        Rng rng(spec.seed * 0x100000001b3ull + 0x9e3779b97f4a7c15ull * (u + 1));
        const int home_region = pick_home_region(rng);
        const auto& home_pool = region_antennas[home_region];
        const int home = home_pool[rng.uniform_int(static_cast<int>(home_pool.size()))];
        double rho = spec.intra_affinity_rho;
        if (home_region == 0) rho *= spec.capital_rho_discount;
        const bool luncher = rng.u01() < spec.luncher_fraction;

        long user_trips = 0;
        for (int day = 0; day < spec.days; ++day) {
            const std::int64_t day_start = spec.start_timestamp + 86400ll * day;
            int current = home;
            // (time, antenna-after) checkpoints for locating fill-in calls
            std::vector<std::pair<std::int64_t, int>> timeline{{day_start, home}};

            auto emit_trip = [&](std::int64_t t_out, int origin, int dest) {
                const std::int64_t t_in =
                    t_out + static_cast<std::int64_t>(rng.uniform(300.0, 1800.0));
                events.push_back({t_out, u, origin});
                events.push_back({t_in, u, dest});
                timeline.push_back({t_in, dest});
                ++manifest.n_trips;
                ++user_trips;
                if (lay.antenna_region[origin] != lay.antenna_region[dest])
                    ++manifest.n_inter_region_trips;
                trips_json.push_back({u, t_out, antenna_name(origin),
                                      antenna_name(dest)});
            };

            for (const auto& burst : spec.schedule) {
                if (burst.lunch && !luncher) continue;
                if (rng.u01() >= burst.weight) continue;
                std::int64_t t = day_start + 60ll * burst.minute +
                                 static_cast<std::int64_t>(rng.normal(0.0, 1200.0));
                t = std::max<std::int64_t>(t, day_start + 5 * 3600);
                if (burst.lunch) {
                    const int dest = nearest_in_region(current);
                    if (dest < 0 || dest == current) continue;
                    emit_trip(t, current, dest);
                    // short round trip: return 30-60 min later
                    const std::int64_t t_back =
                        t + static_cast<std::int64_t>(rng.uniform(1800.0, 3600.0)) +
                        1800;
                    emit_trip(t_back, dest, current);
                    continue;
                }
                int dest;
                if (burst.minute >= 17 * 60) {
                    dest = home;  // evening: return home
                } else {
                    const int cur_region = lay.antenna_region[current];
                    const int target_region =
                        (rng.u01() < rho || nr < 2) ? home_region
                                                    : pick_region(cur_region, rng);
                    dest = pick_in_region_by_jump(current, target_region, rng);
                }
                if (dest < 0 || dest == current) continue;
                emit_trip(t, current, dest);
                current = dest;
            }

            // stationary fill-in calls at the location current at that time
            const int n_fill = rng.poisson(spec.stationary_calls_per_day);
            for (int f = 0; f < n_fill; ++f) {
                const std::int64_t t =
                    day_start + static_cast<std::int64_t>(
                                    rng.uniform(6.0 * 3600, 23.0 * 3600));
                int loc = home;
                for (const auto& [ct, ca] : timeline)
                    if (ct <= t) loc = ca;
                events.push_back({t, u, loc});
            }
        }
        manifest.trips_per_user[user_name(u)] = user_trips;
    }

    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.ts != b.ts) return a.ts < b.ts;
        if (a.user != b.user) return a.user < b.user;
        return a.antenna < b.antenna;
    });
    manifest.n_events = static_cast<long>(events.size());

    // transition tally: consecutive same-user pairs within 24 h, as the
    // network builder will count them
    {
        std::vector<std::vector<std::pair<std::int64_t, int>>> per_user(spec.n_users);
        for (const auto& e : events) per_user[e.user].push_back({e.ts, e.antenna});
        for (auto& seq : per_user) {
            std::stable_sort(seq.begin(), seq.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (size_t k = 1; k < seq.size(); ++k) {
                const std::int64_t dt = seq[k].first - seq[k - 1].first;
                if (dt <= 0 || dt > 24ll * 3600) continue;
                ++manifest.transition_tally[{antenna_name(seq[k - 1].second),
                                             antenna_name(seq[k].second)}];
            }
        }
    }

    SocietyBundle bundle;

    {
        std::ostringstream ss;
        ss << "antenna_id,lon,lat\n";
        char buf[64];
        for (int a = 0; a < n_ant; ++a) {
            std::snprintf(buf, sizeof(buf), "%s,%.7f,%.7f\n", antenna_name(a).c_str(),
                          lay.antenna_pos[a].lon, lay.antenna_pos[a].lat);
            ss << buf;
        }
        bundle.antennas_csv = ss.str();
    }

    {
        // population raster: Gaussian blob per region, mass tracking the
        // region weights used by the destination kernel
        std::ostringstream ss;
        ss << "lon,lat,density\n";
        const double spacing = 0.05;
        char buf[80];
        for (double lat = kLatMin; lat <= kLatMax + 1e-9; lat += spacing)
            for (double lon = kLonMin; lon <= kLonMax + 1e-9; lon += spacing) {
                double density = 0.05;
                for (int r = 0; r < nr; ++r) {
                    const double dx = lon - lay.region_centers[r].lon;
                    const double dy = lat - lay.region_centers[r].lat;
                    density += 50.0 * lay.region_weights[r] *
                               std::exp(-(dx * dx + dy * dy) / (2.0 * 0.35 * 0.35));
                }
                std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.6f\n", lon, lat, density);
                ss << buf;
            }
        bundle.population_csv = ss.str();
        bundle.population_sidecar_json = "{\"spacing_deg\": 0.05}\n";
    }

    {
        std::ostringstream l1, sub;
        l1 << "antenna_id,region_label\n";
        sub << "antenna_id,region_label\n";
        char buf[64];
        for (int a = 0; a < n_ant; ++a) {
            std::snprintf(buf, sizeof(buf), "%s,R%d\n", antenna_name(a).c_str(),
                          lay.antenna_region[a]);
            l1 << buf;
            std::snprintf(buf, sizeof(buf), "%s,R%d_S%d\n", antenna_name(a).c_str(),
                          lay.antenna_region[a],
                          lay.antenna_sub[a] % spec.n_subcommunities_per_region);
            sub << buf;
            manifest.level1[antenna_name(a)] = "R" + std::to_string(lay.antenna_region[a]);
            manifest.subcommunity[antenna_name(a)] =
                "R" + std::to_string(lay.antenna_region[a]) + "_S" +
                std::to_string(lay.antenna_sub[a] % spec.n_subcommunities_per_region);
        }
        bundle.level1_partition_csv = l1.str();
        bundle.subcommunity_partition_csv = sub.str();
    }

    {
        std::ostringstream ss;
        ss << "timestamp,user_id,antenna_id\n";
        for (const auto& e : events)
            ss << e.ts << "," << user_name(e.user) << "," << antenna_name(e.antenna)
               << "\n";
        bundle.cdr_csv = ss.str();
    }

    {
        nlohmann::json j;
        j["generator"] = {{"algorithm", "mt19937_64"}, {"seed", spec.seed}};
        j["spec"] = {{"n_level1_regions", spec.n_level1_regions},
                     {"n_subcommunities_per_region", spec.n_subcommunities_per_region},
                     {"n_antennas", spec.n_antennas},
                     {"n_users", spec.n_users},
                     {"days", spec.days},
                     {"intra_affinity_rho", spec.intra_affinity_rho},
                     {"alpha", spec.alpha},
                     {"beta_g", spec.beta_g},
                     {"gamma", spec.gamma},
                     {"jump_delta_r0_km", spec.jump_delta_r0_km},
                     {"jump_beta", spec.jump_beta},
                     {"jump_kappa_km", spec.jump_kappa_km}};
        j["level1"] = manifest.level1;
        j["subcommunity"] = manifest.subcommunity;
        j["colocated_redundancy"] = lay.colocated_redundancy;
        j["n_events"] = manifest.n_events;
        j["n_trips"] = manifest.n_trips;
        j["n_inter_region_trips"] = manifest.n_inter_region_trips;
        j["trips_per_user"] = manifest.trips_per_user;
        nlohmann::json tally = nlohmann::json::array();
        for (const auto& [od, cnt] : manifest.transition_tally)
            tally.push_back({od.first, od.second, cnt});
        j["transition_tally"] = std::move(tally);
        j["trips"] = std::move(trips_json);
        bundle.manifest_json = j.dump();
        bundle.manifest_json += "\n";
    }

    bundle.manifest = std::move(manifest);
    return bundle;
}

void write_society(const SocietyBundle& bundle, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_file((dir / "antennas.csv").string(), bundle.antennas_csv);
    write_file((dir / "population.csv").string(), bundle.population_csv);
    write_file((dir / "population.json").string(), bundle.population_sidecar_json);
    write_file((dir / "partition_level1.csv").string(), bundle.level1_partition_csv);
    write_file((dir / "partition_sub.csv").string(), bundle.subcommunity_partition_csv);
    write_file((dir / "cdr.csv").string(), bundle.cdr_csv);
    write_file((dir / "manifest.json").string(), bundle.manifest_json);
}

}  // namespace mobility

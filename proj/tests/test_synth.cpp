#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "mobility/geo.hpp"
#include "mobility/io.hpp"
#include "mobility/network.hpp"
#include "mobility/synth.hpp"

using namespace mobility;

namespace {

SocietySpec small_spec(std::uint64_t seed = 7) {
    SocietySpec spec;
    spec.seed = seed;
    spec.n_level1_regions = 4;
    spec.n_subcommunities_per_region = 2;
    spec.n_antennas = 60;
    spec.n_users = 200;
    spec.days = 5;
    return spec;
}

}  // namespace

TEST_CASE("generation is byte-deterministic in the seed") {
    const auto a = generate_society(small_spec(7));
    const auto b = generate_society(small_spec(7));
    CHECK(a.antennas_csv == b.antennas_csv);
    CHECK(a.population_csv == b.population_csv);
    CHECK(a.cdr_csv == b.cdr_csv);
    CHECK(a.level1_partition_csv == b.level1_partition_csv);
    CHECK(a.subcommunity_partition_csv == b.subcommunity_partition_csv);
    CHECK(a.manifest_json == b.manifest_json);

    const auto c = generate_society(small_spec(8));
    CHECK(a.cdr_csv != c.cdr_csv);
    CHECK(a.antennas_csv != c.antennas_csv);
}

TEST_CASE("bundle is internally consistent") {
    const auto spec = small_spec();
    const auto bundle = generate_society(spec);
    const auto& man = bundle.manifest;

    SUBCASE("partitions cover every antenna with the advertised counts") {
        CHECK(static_cast<int>(man.level1.size()) == spec.n_antennas);
        CHECK(static_cast<int>(man.subcommunity.size()) == spec.n_antennas);
        std::set<std::string> tribes, subs;
        for (const auto& [a, t] : man.level1) tribes.insert(t);
        for (const auto& [a, s] : man.subcommunity) subs.insert(s);
        CHECK(static_cast<int>(tribes.size()) == spec.n_level1_regions);
        CHECK(static_cast<int>(subs.size()) ==
              spec.n_level1_regions * spec.n_subcommunities_per_region);
    }

    SUBCASE("event count matches the CDR body") {
        const long lines =
            static_cast<long>(std::count(bundle.cdr_csv.begin(), bundle.cdr_csv.end(), '\n'));
        CHECK(lines == man.n_events + 1);  // header
        CHECK(man.n_events > 0);
    }

    SUBCASE("trip bookkeeping is coherent") {
        long trips = 0;
        for (const auto& [u, t] : man.trips_per_user) trips += t;
        CHECK(trips == man.n_trips);
        CHECK(man.n_inter_region_trips <= man.n_trips);
        CHECK(man.n_inter_region_trips > 0);
    }
}

TEST_CASE("manifest transition tally matches a full io round trip") {
    const auto spec = small_spec(11);
    const auto bundle = generate_society(spec);
    const auto dir =
        std::filesystem::temp_directory_path() / "synth_roundtrip_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_society(bundle, dir.string());

    const auto reg = load_antennas((dir / "antennas.csv").string());
    CHECK(reg.size() == spec.n_antennas);
    const auto level1 = load_partition((dir / "partition_level1.csv").string(), "level1");
    level1.validate(reg);
    const auto sub = load_partition((dir / "partition_sub.csv").string(), "sub");
    sub.validate(reg);
    const auto raster = load_population_raster((dir / "population.csv").string());
    CHECK(raster.spacing_deg > 0.0);
    CHECK(!raster.points.empty());

    const auto events = load_events((dir / "cdr.csv").string(), reg);
    CHECK(events.dropped_unknown_antenna == 0);
    long n_events = 0;
    for (const auto& t : events.trajectories) n_events += t.events.size();
    CHECK(n_events == bundle.manifest.n_events);

    const auto net = build_mobility_network(events.trajectories, reg, 24.0);
    std::map<std::pair<std::string, std::string>, long> tally;
    for (int i = 0; i < net.size(); ++i)
        for (const auto& [j, w] : net.out[i])
            tally[{net.node_ids[i], net.node_ids[j]}] = static_cast<long>(w);
    CHECK(tally == bundle.manifest.transition_tally);

    std::filesystem::remove_all(dir);
}

TEST_CASE("capital region dominates the population") {
    const auto bundle = generate_society(small_spec(3));
    const auto dir = std::filesystem::temp_directory_path() / "synth_capital_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_society(bundle, dir.string());
    const auto raster = load_population_raster((dir / "population.csv").string());
    auto reg = load_antennas((dir / "antennas.csv").string());
    const auto tess = build_voronoi(reg);
    const auto assigned = assign_population(tess, reg, raster);

    std::map<std::string, double> by_region;
    for (const auto& s : assigned.registry.sites)
        by_region[bundle.manifest.level1.at(s.antenna_id)] += s.population;
    const std::string capital = "R0";
    REQUIRE(by_region.count(capital) == 1);
    for (const auto& [label, pop] : by_region)
        if (label != capital) CHECK(by_region.at(capital) > pop);

    std::filesystem::remove_all(dir);
}

TEST_CASE("planted colocated antennas are recovered by collapse") {
    auto spec = small_spec(5);
    spec.n_colocated_groups = 6;
    const auto bundle = generate_society(spec);
    const auto dir = std::filesystem::temp_directory_path() / "synth_coloc_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_society(bundle, dir.string());
    const auto reg = load_antennas((dir / "antennas.csv").string());
    const auto collapsed = collapse_colocated(reg, 10.0);
    CHECK(collapsed.registry.size() <= spec.n_antennas - spec.n_colocated_groups);
    CHECK(collapsed.registry.size() < reg.size());
    // ids always map to a surviving id no larger than themselves
    for (const auto& [old_id, new_id] : collapsed.id_mapping)
        CHECK(new_id <= old_id);
    std::filesystem::remove_all(dir);
}

TEST_CASE("most trips stay within the home region") {
    const auto bundle = generate_society(small_spec(13));
    const auto& man = bundle.manifest;
    const double inter_share =
        static_cast<double>(man.n_inter_region_trips) / man.n_trips;
    CHECK(inter_share > 0.0);
    CHECK(inter_share < 0.5);
}

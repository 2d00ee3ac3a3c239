#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mobility {

/// Deterministic synthetic-society generator: antennas, population raster,
/// partitions (level-1 and sub-community) and a CDR stream with a ground-truth
/// manifest. All randomness comes from mt19937_64 streams derived from the
/// seed; same seed, byte-identical files.
struct SocietySpec {
    std::uint64_t seed = 1;
    int n_level1_regions = 5;
    int n_subcommunities_per_region = 3;
    int n_antennas = 200;
    int n_users = 2000;
    int days = 14;
    double intra_affinity_rho = 0.9;  // probability a trip stays in the home region

    // gravity kernel for inter-region destination choice
    double alpha = 1.0;
    double beta_g = 1.0;
    double gamma = 2.0;

    // jump law for within-region destination distances
    double jump_delta_r0_km = 1.0;
    double jump_beta = 1.62;
    double jump_kappa_km = 122.0;

    // schedule template: burst minute-of-day -> participation probability
    struct Burst {
        int minute = 0;
        double weight = 0.0;
        bool lunch = false;  // short round trip to the nearest antenna
    };
    std::vector<Burst> schedule{{8 * 60, 0.8, false},
                                {12 * 60 + 30, 0.5, true},
                                {19 * 60, 0.8, false}};
    double luncher_fraction = 0.4;  // cohort taking the short midday trips

    // region 0 is the "capital": population boost and a porous border
    double capital_population_factor = 3.0;
    double capital_rho_discount = 0.75;  // rho multiplier for capital-homed users

    std::int64_t start_timestamp = 1641168000;  // 2022-01-03 Monday UTC
    double stationary_calls_per_day = 4.0;

    // when > 0, snaps groups of 2-3 antennas to identical coordinates so that
    // collapse_colocated has planted ground truth to recover
    int n_colocated_groups = 0;
};

struct GroundTruthManifest {
    std::map<std::string, std::string> level1;        // antenna -> tribe label
    std::map<std::string, std::string> subcommunity;  // antenna -> sub label
    // consecutive-call transition tally (24 h window) as emitted
    std::map<std::pair<std::string, std::string>, long> transition_tally;
    std::map<std::string, long> trips_per_user;
    long n_events = 0;
    long n_trips = 0;
    long n_inter_region_trips = 0;
};

struct SocietyBundle {
    std::string antennas_csv;
    std::string population_csv;
    std::string population_sidecar_json;
    std::string level1_partition_csv;
    std::string subcommunity_partition_csv;
    std::string cdr_csv;
    std::string manifest_json;
    GroundTruthManifest manifest;
};

/// Generates the full bundle in memory.
SocietyBundle generate_society(const SocietySpec& spec);

/// Writes the bundle into a directory using fixed file names
/// (antennas.csv, population.csv, population.json, partition_level1.csv,
/// partition_sub.csv, cdr.csv, manifest.json).
void write_society(const SocietyBundle& bundle, const std::string& out_dir);

}  // namespace mobility

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mobility/geo.hpp"

namespace mobility {

struct Displacement {
    std::string user_id;
    std::int64_t t_start = 0;
    std::int64_t t_end = 0;
    int origin = -1;       // registry index
    int destination = -1;  // registry index
    double distance_km = 0.0;
};

enum class ProfileKind { DisplacementProbability, MeanDistanceKm };

struct TemporalProfile {
    int window_minutes = 40;
    int step_minutes = 10;
    ProfileKind kind = ProfileKind::DisplacementProbability;
    // one entry per window start (0, step, 2*step, ... < 1440);
    // nullopt marks windows with no qualifying pairs
    std::vector<std::optional<double>> values;
    // set for distance-binned profiles
    std::optional<double> bin_lo_km, bin_hi_km;

    int n_windows() const { return static_cast<int>(values.size()); }
    int window_start_minute(int idx) const { return idx * step_minutes; }
};

struct GyrationSample {
    std::string user_id;
    double r_g_km = 0.0;
    int n_events = 0;
};

struct ProfileOptions {
    int window_minutes = 40;
    int step_minutes = 10;
    bool weekdays_only = false;
    int utc_offset_hours = 0;
    // pairs with a gap above this are not commuting observations
    std::int64_t max_gap_seconds = 24 * 3600;
    // pooled: sum counts across days, divide once (default); when false the
    // mean of per-day ratios is taken instead
    bool pool_days = true;
};

/// One displacement per consecutive event pair with differing antennas;
/// distance by haversine between antenna positions.
std::vector<Displacement> extract_displacements(const Trajectory& traj,
                                                const AntennaRegistry& reg);

/// r_g = sqrt(mean squared projected distance from the event centroid), one
/// term per event, repeats included.
GyrationSample radius_of_gyration(const Trajectory& traj, const AntennaRegistry& reg);

TemporalProfile displacement_probability_profile(const std::vector<Trajectory>& trajs,
                                                 const AntennaRegistry& reg,
                                                 const ProfileOptions& opt = {});

TemporalProfile mean_distance_profile(const std::vector<Trajectory>& trajs,
                                      const AntennaRegistry& reg,
                                      const ProfileOptions& opt = {});

struct DistanceBin {
    double lo_km = 0.0;
    double hi_km = 0.0;  // half-open [lo, hi)
};

inline std::vector<DistanceBin> default_distance_bins() {
    return {{0, 1}, {1, 5}, {5, 10}, {10, 20}, {20, 50}};
}

/// Per-bin displacement-probability profiles; the denominator is all
/// inter-call pairs in the window, so the per-bin values sum to the unbinned
/// probability.
std::vector<TemporalProfile> distance_binned_profiles(
    const std::vector<Trajectory>& trajs, const AntennaRegistry& reg,
    const std::vector<DistanceBin>& bins = default_distance_bins(),
    const ProfileOptions& opt = {});

/// CSV export: window_start_min,statistic,kind,bin_lo_km,bin_hi_km
std::string profiles_csv(const std::vector<TemporalProfile>& profiles);

}  // namespace mobility

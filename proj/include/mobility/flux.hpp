#pragma once

#include <map>
#include <string>
#include <vector>

#include "mobility/geo.hpp"
#include "mobility/network.hpp"

namespace mobility {

struct RegionProfile {
    std::string region_label;
    double population = 0.0;
    LonLat centroid;  // population-weighted over member antennas
    std::vector<std::string> member_antennas;
};

enum class FluxKind { Observed, Modeled };

struct FluxMatrix {
    std::vector<std::string> regions;
    std::vector<double> t;  // row-major, regions x regions
    FluxKind kind = FluxKind::Observed;

    int size() const { return static_cast<int>(regions.size()); }
    double& at(int i, int j) { return t[static_cast<size_t>(i) * regions.size() + j]; }
    double at(int i, int j) const {
        return t[static_cast<size_t>(i) * regions.size() + j];
    }
    double outflow(int i) const;  // off-diagonal row sum
};

FluxMatrix make_flux(std::vector<std::string> regions, FluxKind kind);

struct GravityParams {
    double alpha = 1.0;
    double beta_g = 1.0;  // destination exponent (beta clashes with the jump law's)
    double gamma = 2.0;
    double scale = 1.0;
};

/// Region populations and population-weighted centroids from a labeled
/// registry. Antennas with zero population still contribute to membership
/// (their centroid weight falls back to uniform when the region total is 0).
std::vector<RegionProfile> region_profiles(const AntennaRegistry& reg,
                                           const PartitionScheme& scheme);

/// T[r][s] = sum of W[i][j] over i in r, j in s.
FluxMatrix aggregate_flux(const MobilityNetwork& net, const AntennaRegistry& reg,
                          const PartitionScheme& scheme);

/// Gravity kernel scale * m_i^alpha * n_j^beta / r_ij^gamma, diagonal 0.
FluxMatrix gravity_predict(const GravityParams& params,
                           const std::vector<RegionProfile>& profiles);

/// Log-space linear least squares over strictly positive off-diagonal entries.
GravityParams gravity_fit(const FluxMatrix& observed,
                          const std::vector<RegionProfile>& profiles);

/// Parameter-free radiation model; T_i taken from the observed off-diagonal
/// outflows. s_ij sums populations of regions (other than i and j) within
/// centroid distance r_ij of i, inclusive.
FluxMatrix radiation_predict(const std::vector<RegionProfile>& profiles,
                             const std::vector<double>& outflows);

struct MapeResult {
    double mape = 0.0;          // percent
    long n_compared = 0;
    long n_excluded_zero = 0;   // observed-zero entries left out
};

/// Mean absolute percentage error over off-diagonal entries with observed > 0.
MapeResult mape(const FluxMatrix& observed, const FluxMatrix& modeled);

struct EntrySplit {
    std::vector<std::pair<int, int>> intra, inter;  // off-diagonal (i, j)
};

/// Entry (r, s) is intra iff both regions share a level-1 label.
EntrySplit split_intra_inter(const FluxMatrix& flux,
                             const std::map<std::string, std::string>& level1);

MapeResult mape_over(const FluxMatrix& observed, const FluxMatrix& modeled,
                     const std::vector<std::pair<int, int>>& entries);

struct AffinityBias {
    double s_intra = 0.0;
    double s_inter = 0.0;
    double d_percent = 0.0;  // symmetric percent difference
};

/// S = mean of modeled/observed ratios, split into intra and inter entry
/// sets; D = 200 * |S_inter - S_intra| / (S_inter + S_intra).
AffinityBias affinity_bias(const FluxMatrix& observed, const FluxMatrix& modeled,
                           const std::map<std::string, std::string>& level1);

std::string flux_csv(const FluxMatrix& flux);

}  // namespace mobility

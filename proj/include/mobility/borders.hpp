#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobility/geo.hpp"
#include "mobility/network.hpp"

namespace mobility {

struct NormalizedFlows {
    std::vector<std::unordered_map<int, double>> m;  // m_ij = w_ij / total
    std::vector<double> row_sums;  // S_i
    std::vector<double> col_sums;  // T_j

    int size() const { return static_cast<int>(m.size()); }
    double at(int i, int j) const;
    double diag(int i) const { return at(i, i); }
};

/// m_ij = w_ij / sum(w); row and column sums computed alongside.
NormalizedFlows normalize_flows(const MobilityNetwork& net);

/// e_ij = m_ij - S_i * T_j, dense. Intended for small graphs and oracles;
/// strength_field uses partition-sum identities instead.
std::vector<std::vector<double>> edge_excess(const NormalizedFlows& nf);

/// C_{i,P} = sum_{j in P, j != i} (e_ij + e_ji) / (S_i + T_i - 2 m_ii).
/// node_partition maps node index -> partition index.
double connectedness(const NormalizedFlows& nf, int node,
                     const std::vector<int>& node_partition, int partition);

struct BorderStrengthField {
    std::string scheme_name;
    std::vector<std::string> node_ids;
    std::vector<std::optional<double>> s;               // missing for isolated nodes
    std::vector<std::string> assigned_region;
    std::vector<std::string> best_foreign_region;       // argmax in the margin
};

/// s_i = C_{i,P_i} - max over foreign partitions of C_{i,D}.
BorderStrengthField strength_field(const MobilityNetwork& net,
                                   const PartitionScheme& scheme);

using BorderId = std::pair<std::string, std::string>;  // sorted region labels

struct BorderPolyline {
    BorderId border_id;
    std::vector<Polygon> polylines;  // open chains of lon/lat vertices
};

/// Voronoi edges separating different-region cells, concatenated into chains.
std::vector<BorderPolyline> border_polylines(const VoronoiTessellation& tess,
                                             const PartitionScheme& scheme);

struct BorderSample {
    LonLat position;
    double s = 0.0;
    BorderId border_id;
};

struct BorderSampleSet {
    std::vector<BorderSample> samples;
    std::map<BorderId, double> mean_positive;  // over strictly positive samples
};

/// Points every spacing_km along each border polyline; values by
/// inverse-distance weighting (power 1) over the k nearest antennas with a
/// defined s.
BorderSampleSet sample_border_strength(const BorderStrengthField& field,
                                       const std::vector<BorderPolyline>& polylines,
                                       const AntennaRegistry& reg,
                                       double spacing_km = 5.0, int k_neighbors = 8);

struct BorderHistogram {
    std::vector<double> bin_edges;  // over [-1, 1]
    std::map<std::string, std::vector<long>> counts;   // border group -> per-bin
    std::map<std::string, double> mean_positive;       // marker per group
};

/// Histogram of sampled strength values per border group. A border's group is
/// "capital" when either side is in capital_regions, "other" otherwise; with
/// no capital set every border is its own group.
BorderHistogram border_histogram(const BorderSampleSet& samples,
                                 double bin_width = 0.05,
                                 const std::vector<std::string>& capital_regions = {});

std::string strength_field_csv(const BorderStrengthField& field);
std::string border_samples_geojson(const BorderSampleSet& samples);
std::string border_histogram_csv(const BorderHistogram& hist);

}  // namespace mobility

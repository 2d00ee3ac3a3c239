#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobility/geo.hpp"

namespace mobility {

/// Weighted directed antenna-level graph of consecutive-call transitions.
struct MobilityNetwork {
    std::vector<std::string> node_ids;
    // out[i][j] = number of observed transitions i -> j (diagonal permitted)
    std::vector<std::unordered_map<int, double>> out;

    int size() const { return static_cast<int>(node_ids.size()); }
    double weight(int i, int j) const;
    void add(int i, int j, double w);
    double total_weight() const;

    /// A = W + W^T as an adjacency list (diagonal entries doubled).
    std::vector<std::vector<std::pair<int, double>>> symmetrized() const;
};

MobilityNetwork make_network(std::vector<std::string> node_ids);

/// W[i][j] += 1 for each consecutive same-user event pair with
/// 0 < dt <= window_hours.
MobilityNetwork build_mobility_network(const std::vector<Trajectory>& trajs,
                                       const AntennaRegistry& reg,
                                       double window_hours = 24.0);

struct CommunityAssignment {
    std::vector<int> labels;  // node index -> community, contiguous from 0
    int n_communities = 0;
};

/// Newman modularity Q on the symmetrized matrix; in [-1, 1].
double modularity(const MobilityNetwork& net, const CommunityAssignment& asg);

/// Two-phase Louvain on the symmetrized weighted graph. Node sweep order is a
/// seeded shuffle; deterministic given seed.
CommunityAssignment louvain(const MobilityNetwork& net, unsigned seed);

/// Louvain run independently inside each level-1 region; labels are globally
/// unique and nested. Regions whose induced subgraph has no edges become a
/// single sub-community and are reported.
struct ConstrainedResult {
    CommunityAssignment assignment;
    std::vector<std::string> edgeless_regions;
};
ConstrainedResult constrained_subcommunities(const MobilityNetwork& net,
                                             const PartitionScheme& level1,
                                             unsigned seed);

struct PairCounts {
    // pairs co-clustered in both / first only / second only / neither
    long long a = 0, b = 0, c = 0, d = 0;
    long long n_pairs() const { return a + b + c + d; }
};

/// Both partitions as label vectors over the same element set.
PairCounts pair_counts(const std::vector<int>& p1, const std::vector<int>& p2);

/// The eight pair-counting / matching similarity indices. Wallace uses p1 as
/// reference; "wallace_reverse" carries the other direction.
std::map<std::string, double> similarity_indices(const std::vector<int>& p1,
                                                 const std::vector<int>& p2);

/// Helper: partition scheme -> label vector in network node order.
std::vector<int> labels_for(const MobilityNetwork& net, const PartitionScheme& scheme);

std::string communities_csv(const MobilityNetwork& net, const CommunityAssignment& asg);

}  // namespace mobility

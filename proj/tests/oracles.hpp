#pragma once

// Independent brute-force oracles used by the unit and acceptance suites.
// These deliberately avoid the library's computation paths.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mobility/borders.hpp"
#include "mobility/geo.hpp"
#include "mobility/network.hpp"

namespace oracles {

// modularity straight from the matrix definition on A = W + W^T
inline double modularity_direct(const mobility::MobilityNetwork& net,
                                const std::vector<int>& labels) {
    const int n = net.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : net.out[i]) {
            a[i][j] += w;
            a[j][i] += w;
        }
    std::vector<double> k(n, 0.0);
    double two_m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            k[i] += a[i][j];
            two_m += a[i][j];
        }
    double q = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (labels[i] == labels[j])
                q += a[i][j] / two_m - k[i] * k[j] / (two_m * two_m);
    return q;
}

// exhaustive maximum over all partitions (restricted set partition
// enumeration; practical for n <= 8)
inline double max_modularity_exhaustive(const mobility::MobilityNetwork& net) {
    const int n = net.size();
    std::vector<int> labels(n, 0);
    double best = -2.0;
    // enumerate restricted growth strings
    std::vector<int> rgs(n, 0);
    while (true) {
        best = std::max(best, modularity_direct(net, rgs));
        int i = n - 1;
        for (; i > 0; --i) {
            int max_prefix = 0;
            for (int j = 0; j < i; ++j) max_prefix = std::max(max_prefix, rgs[j]);
            if (rgs[i] <= max_prefix) {
                ++rgs[i];
                for (int j = i + 1; j < n; ++j) rgs[j] = 0;
                break;
            }
        }
        if (i == 0) break;
    }
    return best;
}

// O(n^2) pair counting by direct enumeration
inline mobility::PairCounts pair_counts_brute(const std::vector<int>& p1,
                                              const std::vector<int>& p2) {
    mobility::PairCounts pc;
    const size_t n = p1.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const bool same1 = p1[i] == p1[j];
            const bool same2 = p2[i] == p2[j];
            if (same1 && same2)
                ++pc.a;
            else if (same1)
                ++pc.b;
            else if (same2)
                ++pc.c;
            else
                ++pc.d;
        }
    return pc;
}

// radiation screening mass by exhaustive distance comparison
inline double s_ij_brute(const std::vector<mobility::LonLat>& centroids,
                         const std::vector<double>& populations, int i, int j) {
    const double rij = mobility::haversine_km(centroids[i], centroids[j]);
    double acc = 0.0;
    for (size_t k = 0; k < centroids.size(); ++k) {
        if (static_cast<int>(k) == i || static_cast<int>(k) == j) continue;
        if (mobility::haversine_km(centroids[i], centroids[k]) <= rij)
            acc += populations[k];
    }
    return acc;
}

// Eq-by-eq border connectedness via the dense excess matrix
inline double connectedness_brute(const mobility::NormalizedFlows& nf,
                                  const std::vector<std::vector<double>>& e, int i,
                                  const std::vector<int>& node_partition, int p) {
    double num = 0.0;
    for (size_t j = 0; j < e.size(); ++j) {
        if (static_cast<int>(j) == i || node_partition[j] != p) continue;
        num += e[i][j] + e[j][i];
    }
    return num / (nf.row_sums[i] + nf.col_sums[i] - 2.0 * nf.diag(i));
}

}  // namespace oracles

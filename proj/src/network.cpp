#include "mobility/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "mobility/errors.hpp"

namespace mobility {

double MobilityNetwork::weight(int i, int j) const {
    auto it = out[i].find(j);
    return it == out[i].end() ? 0.0 : it->second;
}

void MobilityNetwork::add(int i, int j, double w) { out[i][j] += w; }

double MobilityNetwork::total_weight() const {
    double acc = 0.0;
    for (const auto& row : out)
        for (const auto& [j, w] : row) acc += w;
    return acc;
}

std::vector<std::vector<std::pair<int, double>>> MobilityNetwork::symmetrized() const {
    const int n = size();
    std::vector<std::unordered_map<int, double>> acc(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : out[i]) {
            acc[i][j] += w;
            acc[j][i] += w;
        }
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (int i = 0; i < n; ++i) {
        adj[i].assign(acc[i].begin(), acc[i].end());
        std::sort(adj[i].begin(), adj[i].end());
    }
    return adj;
}

MobilityNetwork make_network(std::vector<std::string> node_ids) {
    MobilityNetwork net;
    net.out.resize(node_ids.size());
    net.node_ids = std::move(node_ids);
    return net;
}

MobilityNetwork build_mobility_network(const std::vector<Trajectory>& trajs,
                                       const AntennaRegistry& reg,
                                       double window_hours) {
    std::vector<std::string> ids;
    ids.reserve(reg.size());
    for (const auto& s : reg.sites) ids.push_back(s.antenna_id);
    MobilityNetwork net = make_network(std::move(ids));
    const double window_s = window_hours * 3600.0;
    for (const auto& traj : trajs) {
        for (size_t k = 1; k < traj.events.size(); ++k) {
            const auto& a = traj.events[k - 1];
            const auto& b = traj.events[k];
            const double dt = static_cast<double>(b.timestamp - a.timestamp);
            if (dt <= 0.0 || dt > window_s) continue;
            net.add(a.antenna, b.antenna, 1.0);
        }
    }
    return net;
}

double modularity(const MobilityNetwork& net, const CommunityAssignment& asg) {
    const auto adj = net.symmetrized();
    const int n = net.size();
    if (static_cast<int>(asg.labels.size()) != n)
        throw ValidationError("assignment does not cover the network");

    std::vector<double> k(n, 0.0);
    double two_m = 0.0;
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : adj[i]) {
            k[i] += w;
            two_m += w;
        }
    if (two_m <= 0.0) throw NumericalError("network has no edges");

    const int nc = asg.n_communities;
    std::vector<double> sum_in(nc, 0.0), sum_tot(nc, 0.0);
    for (int i = 0; i < n; ++i) {
        sum_tot[asg.labels[i]] += k[i];
        for (const auto& [j, w] : adj[i])
            if (asg.labels[j] == asg.labels[i]) sum_in[asg.labels[i]] += w;
    }
    double q = 0.0;
    for (int c = 0; c < nc; ++c)
        q += sum_in[c] / two_m - (sum_tot[c] / two_m) * (sum_tot[c] / two_m);
    return q;
}

namespace {

struct Graph {
    // symmetric; self-loop stored once with its full Sigma_in value
    std::vector<std::unordered_map<int, double>> adj;
    int size() const { return static_cast<int>(adj.size()); }
};

// explicit Fisher-Yates so shuffles are identical across standard libraries
void seeded_shuffle(std::vector<int>& v, std::mt19937& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = rng() % i;
        std::swap(v[i - 1], v[j]);
    }
}

// one full Louvain pass over graph g; returns node -> community (contiguous)
// or empty vector when no move improved modularity
std::vector<int> louvain_level(const Graph& g, std::mt19937& rng) {
    const int n = g.size();
    std::vector<double> k(n, 0.0);
    double two_m = 0.0;
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : g.adj[i]) {
            k[i] += w;
            two_m += w;
        }
    if (two_m <= 0.0) return {};

    std::vector<int> comm(n);
    std::vector<double> sum_tot = k;
    for (int i = 0; i < n; ++i) comm[i] = i;

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    seeded_shuffle(order, rng);

    bool any_move = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (int i : order) {
            const int c_old = comm[i];
            // neighbor community -> connecting weight (excluding self-loop)
            std::map<int, double> k_in;
            k_in[c_old];  // staying is always a candidate
            for (const auto& [j, w] : g.adj[i])
                if (j != i) k_in[comm[j]] += w;

            sum_tot[c_old] -= k[i];
            comm[i] = -1;

            int best_c = c_old;
            double best_gain = k_in[c_old] / two_m * 2.0 -
                               2.0 * sum_tot[c_old] * k[i] / (two_m * two_m);
            for (const auto& [c, kw] : k_in) {
                const double gain =
                    kw / two_m * 2.0 - 2.0 * sum_tot[c] * k[i] / (two_m * two_m);
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_c = c;
                }
            }
            comm[i] = best_c;
            sum_tot[best_c] += k[i];
            if (best_c != c_old) {
                improved = true;
                any_move = true;
            }
        }
    }
    if (!any_move) return {};

    // relabel contiguous by node order
    std::unordered_map<int, int> relabel;
    for (int i = 0; i < n; ++i) {
        auto [it, inserted] = relabel.emplace(comm[i], static_cast<int>(relabel.size()));
        comm[i] = it->second;
    }
    return comm;
}

Graph aggregate(const Graph& g, const std::vector<int>& comm, int nc) {
    Graph out;
    out.adj.resize(nc);
    for (int i = 0; i < g.size(); ++i)
        for (const auto& [j, w] : g.adj[i]) {
            const int ci = comm[i], cj = comm[j];
            if (ci == cj) {
                // each off-diagonal pair visits twice (i,j) and (j,i); the
                // self-loop once; both accumulate the full internal weight
                out.adj[ci][ci] += w;
            } else if (i != j) {
                out.adj[ci][cj] += w;
            }
        }
    return out;
}

}  // namespace

CommunityAssignment louvain(const MobilityNetwork& net, unsigned seed) {
    const int n = net.size();
    Graph g;
    g.adj.resize(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : net.out[i]) {
            if (i == j) {
                g.adj[i][i] += 2.0 * w;  // W + W^T doubles the diagonal
            } else {
                g.adj[i][j] += w;
                g.adj[j][i] += w;
            }
        }
    if (net.total_weight() <= 0.0) throw NumericalError("network has no edges");

    std::mt19937 rng(seed);
    std::vector<int> mapping(n);
    for (int i = 0; i < n; ++i) mapping[i] = i;

    Graph cur = g;
    while (true) {
        const auto comm = louvain_level(cur, rng);
        if (comm.empty()) break;
        int nc = 0;
        for (int c : comm) nc = std::max(nc, c + 1);
        for (int i = 0; i < n; ++i) mapping[i] = comm[mapping[i]];
        if (nc == cur.size()) break;
        cur = aggregate(cur, comm, nc);
    }

    CommunityAssignment asg;
    asg.labels.resize(n);
    std::unordered_map<int, int> relabel;
    for (int i = 0; i < n; ++i) {
        auto [it, inserted] = relabel.emplace(mapping[i], static_cast<int>(relabel.size()));
        asg.labels[i] = it->second;
    }
    asg.n_communities = static_cast<int>(relabel.size());
    return asg;
}

ConstrainedResult constrained_subcommunities(const MobilityNetwork& net,
                                             const PartitionScheme& level1,
                                             unsigned seed) {
    const int n = net.size();
    std::map<std::string, std::vector<int>> regions;
    for (int i = 0; i < n; ++i)
        regions[level1.region_of(net.node_ids[i])].push_back(i);

    ConstrainedResult result;
    result.assignment.labels.assign(n, -1);
    int next_label = 0;
    for (const auto& [region, members] : regions) {
        // induced subgraph; edges crossing regions discarded
        std::unordered_map<int, int> local;
        std::vector<std::string> ids;
        for (int m : members) {
            local[m] = static_cast<int>(ids.size());
            ids.push_back(net.node_ids[m]);
        }
        MobilityNetwork sub = make_network(ids);
        for (int m : members)
            for (const auto& [j, w] : net.out[m]) {
                auto it = local.find(j);
                if (it != local.end()) sub.add(local[m], it->second, w);
            }
        if (sub.total_weight() <= 0.0) {
            result.edgeless_regions.push_back(region);
            for (int m : members) result.assignment.labels[m] = next_label;
            ++next_label;
            continue;
        }
        const auto sub_asg = louvain(sub, seed);
        for (int m : members)
            result.assignment.labels[m] = next_label + sub_asg.labels[local[m]];
        next_label += sub_asg.n_communities;
    }
    result.assignment.n_communities = next_label;
    return result;
}

namespace {

long long choose2(long long x) { return x * (x - 1) / 2; }

struct Contingency {
    std::vector<long long> rows, cols;          // cluster sizes
    std::map<std::pair<int, int>, long long> cells;
    long long n = 0;

    Contingency(const std::vector<int>& p1, const std::vector<int>& p2) {
        if (p1.size() != p2.size())
            throw ValidationError("partitions cover different element sets");
        if (p1.empty()) throw ValidationError("empty partitions");
        int k1 = 0, k2 = 0;
        for (size_t i = 0; i < p1.size(); ++i) {
            k1 = std::max(k1, p1[i] + 1);
            k2 = std::max(k2, p2[i] + 1);
        }
        rows.assign(k1, 0);
        cols.assign(k2, 0);
        n = static_cast<long long>(p1.size());
        for (size_t i = 0; i < p1.size(); ++i) {
            ++rows[p1[i]];
            ++cols[p2[i]];
            ++cells[{p1[i], p2[i]}];
        }
    }
};

}  // namespace

PairCounts pair_counts(const std::vector<int>& p1, const std::vector<int>& p2) {
    const Contingency ct(p1, p2);
    long long sum_cells = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [rc, cnt] : ct.cells) sum_cells += choose2(cnt);
    for (long long r : ct.rows) sum_rows += choose2(r);
    for (long long c : ct.cols) sum_cols += choose2(c);
    PairCounts pc;
    pc.a = sum_cells;
    pc.b = sum_rows - sum_cells;
    pc.c = sum_cols - sum_cells;
    pc.d = choose2(ct.n) - pc.a - pc.b - pc.c;
    return pc;
}

std::map<std::string, double> similarity_indices(const std::vector<int>& p1,
                                                 const std::vector<int>& p2) {
    const Contingency ct(p1, p2);
    const PairCounts pc = pair_counts(p1, p2);
    const double a = static_cast<double>(pc.a);
    const double b = static_cast<double>(pc.b);
    const double c = static_cast<double>(pc.c);
    const double d = static_cast<double>(pc.d);
    const double np = static_cast<double>(pc.n_pairs());

    std::map<std::string, double> idx;
    idx["rand"] = (a + d) / np;
    idx["jaccard"] = (a + b + c) > 0.0 ? a / (a + b + c) : 1.0;
    idx["fowlkes_mallows"] =
        ((a + b) > 0.0 && (a + c) > 0.0) ? a / std::sqrt((a + b) * (a + c)) : 1.0;
    idx["wallace"] = (a + b) > 0.0 ? a / (a + b) : 1.0;
    idx["wallace_reverse"] = (a + c) > 0.0 ? a / (a + c) : 1.0;
    idx["hubert"] = (a + d - b - c) / np;

    // adjusted Rand from the contingency table
    const double sum_rows = a + b, sum_cols = a + c;
    const double expected = sum_rows * sum_cols / np;
    const double max_index = (sum_rows + sum_cols) / 2.0;
    idx["adjusted_rand"] =
        (max_index - expected) != 0.0 ? (a - expected) / (max_index - expected) : 1.0;

    // Meila-Heckerman: greedy one-to-one matching by descending overlap
    struct Cell {
        long long cnt;
        int r, c;
    };
    std::vector<Cell> cells;
    for (const auto& [rc, cnt] : ct.cells) cells.push_back({cnt, rc.first, rc.second});
    std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
        if (x.cnt != y.cnt) return x.cnt > y.cnt;
        if (x.r != y.r) return x.r < y.r;
        return x.c < y.c;
    });
    std::vector<bool> used_r(ct.rows.size(), false), used_c(ct.cols.size(), false);
    long long matched = 0;
    for (const auto& cell : cells) {
        if (used_r[cell.r] || used_c[cell.c]) continue;
        used_r[cell.r] = true;
        used_c[cell.c] = true;
        matched += cell.cnt;
    }
    idx["meila_heckerman"] = static_cast<double>(matched) / static_cast<double>(ct.n);

    // Larsen: average best dice overlap per p1 cluster
    double larsen = 0.0;
    for (size_t r = 0; r < ct.rows.size(); ++r) {
        if (ct.rows[r] == 0) continue;
        double best = 0.0;
        for (size_t cc = 0; cc < ct.cols.size(); ++cc) {
            auto it = ct.cells.find({static_cast<int>(r), static_cast<int>(cc)});
            if (it == ct.cells.end()) continue;
            best = std::max(best, 2.0 * static_cast<double>(it->second) /
                                      static_cast<double>(ct.rows[r] + ct.cols[cc]));
        }
        larsen += best;
    }
    long long nonempty = 0;
    for (long long r : ct.rows)
        if (r > 0) ++nonempty;
    idx["larsen"] = larsen / static_cast<double>(nonempty);

    return idx;
}

std::vector<int> labels_for(const MobilityNetwork& net, const PartitionScheme& scheme) {
    std::vector<int> labels(net.size());
    std::map<std::string, int> ids;
    for (int i = 0; i < net.size(); ++i) {
        const std::string& r = scheme.region_of(net.node_ids[i]);
        auto [it, inserted] = ids.emplace(r, static_cast<int>(ids.size()));
        labels[i] = it->second;
    }
    return labels;
}

std::string communities_csv(const MobilityNetwork& net, const CommunityAssignment& asg) {
    std::ostringstream ss;
    ss << "antenna_id,community_label\n";
    for (int i = 0; i < net.size(); ++i)
        ss << net.node_ids[i] << "," << asg.labels[i] << "\n";
    return ss.str();
}

}  // namespace mobility

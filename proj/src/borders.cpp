#include "mobility/borders.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mobility/errors.hpp"

namespace mobility {

double NormalizedFlows::at(int i, int j) const {
    auto it = m[i].find(j);
    return it == m[i].end() ? 0.0 : it->second;
}

NormalizedFlows normalize_flows(const MobilityNetwork& net) {
    const double total = net.total_weight();
    if (total <= 0.0) throw NumericalError("zero total flow");
    NormalizedFlows nf;
    const int n = net.size();
    nf.m.resize(n);
    nf.row_sums.assign(n, 0.0);
    nf.col_sums.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : net.out[i]) {
            const double v = w / total;
            nf.m[i][j] = v;
            nf.row_sums[i] += v;
            nf.col_sums[j] += v;
        }
    return nf;
}

std::vector<std::vector<double>> edge_excess(const NormalizedFlows& nf) {
    const int n = nf.size();
    std::vector<std::vector<double>> e(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            e[i][j] = nf.at(i, j) - nf.row_sums[i] * nf.col_sums[j];
    return e;
}

namespace {

// per-partition sums of S and T let C_{i,P} be computed without the dense
// excess matrix:
//   sum_{j in P, j != i} (e_ij + e_ji)
//     = sum_{j in P, j != i} (m_ij + m_ji) - S_i T(P\{i}) - T_i S(P\{i})
struct PartitionSums {
    std::vector<double> s_sum, t_sum;  // per partition
};

PartitionSums partition_sums(const NormalizedFlows& nf,
                             const std::vector<int>& node_partition, int n_parts) {
    PartitionSums ps;
    ps.s_sum.assign(n_parts, 0.0);
    ps.t_sum.assign(n_parts, 0.0);
    for (int i = 0; i < nf.size(); ++i) {
        ps.s_sum[node_partition[i]] += nf.row_sums[i];
        ps.t_sum[node_partition[i]] += nf.col_sums[i];
    }
    return ps;
}

double connectedness_impl(const NormalizedFlows& nf, int i,
                          const std::vector<int>& node_partition, int partition,
                          const PartitionSums& ps) {
    const double denom =
        nf.row_sums[i] + nf.col_sums[i] - 2.0 * nf.diag(i);
    if (denom <= 0.0) throw NumericalError("isolated node");

    double flow = 0.0;  // sum over j in P, j != i of (m_ij + m_ji)
    for (const auto& [j, v] : nf.m[i])
        if (j != i && node_partition[j] == partition) flow += v;
    for (int j = 0; j < nf.size(); ++j) {
        if (j == i || node_partition[j] != partition) continue;
        auto it = nf.m[j].find(i);
        if (it != nf.m[j].end()) flow += it->second;
    }
    double t_part = ps.t_sum[partition];
    double s_part = ps.s_sum[partition];
    if (node_partition[i] == partition) {
        t_part -= nf.col_sums[i];
        s_part -= nf.row_sums[i];
    }
    const double expected = nf.row_sums[i] * t_part + nf.col_sums[i] * s_part;
    return (flow - expected) / denom;
}

}  // namespace

double connectedness(const NormalizedFlows& nf, int node,
                     const std::vector<int>& node_partition, int partition) {
    int n_parts = 0;
    for (int p : node_partition) n_parts = std::max(n_parts, p + 1);
    const auto ps = partition_sums(nf, node_partition, n_parts);
    return connectedness_impl(nf, node, node_partition, partition, ps);
}

BorderStrengthField strength_field(const MobilityNetwork& net,
                                   const PartitionScheme& scheme) {
    const NormalizedFlows nf = normalize_flows(net);
    const int n = net.size();

    std::map<std::string, int> part_idx;
    std::vector<int> node_partition(n);
    for (int i = 0; i < n; ++i) {
        const std::string& r = scheme.region_of(net.node_ids[i]);
        auto [it, inserted] = part_idx.emplace(r, static_cast<int>(part_idx.size()));
        node_partition[i] = it->second;
    }
    const int n_parts = static_cast<int>(part_idx.size());
    if (n_parts < 2) throw ValidationError("need >= 2 partitions for border strength");
    std::vector<std::string> part_labels(n_parts);
    for (const auto& [label, idx] : part_idx) part_labels[idx] = label;

    const auto ps = partition_sums(nf, node_partition, n_parts);

    BorderStrengthField field;
    field.scheme_name = scheme.name;
    field.node_ids = net.node_ids;
    field.s.assign(n, std::nullopt);
    field.assigned_region.resize(n);
    field.best_foreign_region.assign(n, "");

    for (int i = 0; i < n; ++i) {
        field.assigned_region[i] = part_labels[node_partition[i]];
        const double denom = nf.row_sums[i] + nf.col_sums[i] - 2.0 * nf.diag(i);
        if (denom <= 0.0) continue;  // isolated: s_i reported as missing

        double own = 0.0, best_foreign = -1e300;
        int best_d = -1;
        for (int p = 0; p < n_parts; ++p) {
            const double c = connectedness_impl(nf, i, node_partition, p, ps);
            if (p == node_partition[i]) {
                own = c;
            } else if (c > best_foreign) {
                best_foreign = c;
                best_d = p;
            }
        }
        field.s[i] = own - best_foreign;
        field.best_foreign_region[i] = part_labels[best_d];
    }
    return field;
}

namespace {

// quantized endpoint key for chaining border segments
std::pair<long long, long long> quantize(const LonLat& p) {
    return {static_cast<long long>(std::llround(p.lon * 1e7)),
            static_cast<long long>(std::llround(p.lat * 1e7))};
}

}  // namespace

std::vector<BorderPolyline> border_polylines(const VoronoiTessellation& tess,
                                             const PartitionScheme& scheme) {
    // shared edge of a neighbor pair = vertices common to both cell polygons
    std::map<BorderId, std::vector<std::pair<LonLat, LonLat>>> segments;
    for (const auto& [i, j] : tess.neighbor_pairs) {
        const std::string& ri = scheme.region_of(tess.antenna_ids[i]);
        const std::string& rj = scheme.region_of(tess.antenna_ids[j]);
        if (ri == rj) continue;
        std::vector<LonLat> shared;
        for (const auto& a : tess.cells[i])
            for (const auto& b : tess.cells[j])
                if (quantize(a) == quantize(b)) {
                    shared.push_back(a);
                    break;
                }
        if (shared.size() < 2) continue;
        BorderId id = ri < rj ? BorderId{ri, rj} : BorderId{rj, ri};
        // more than 2 shared vertices is a degenerate tessellation corner;
        // take the farthest pair
        size_t ia = 0, ib = 1;
        if (shared.size() > 2) {
            double best = -1.0;
            for (size_t a = 0; a < shared.size(); ++a)
                for (size_t b = a + 1; b < shared.size(); ++b) {
                    const double d = haversine_km(shared[a], shared[b]);
                    if (d > best) {
                        best = d;
                        ia = a;
                        ib = b;
                    }
                }
        }
        segments[id].push_back({shared[ia], shared[ib]});
    }

    std::vector<BorderPolyline> out;
    for (auto& [id, segs] : segments) {
        BorderPolyline bp;
        bp.border_id = id;
        // greedy chaining of segments sharing endpoints
        std::vector<bool> used(segs.size(), false);
        for (size_t s0 = 0; s0 < segs.size(); ++s0) {
            if (used[s0]) continue;
            used[s0] = true;
            std::vector<LonLat> chain{segs[s0].first, segs[s0].second};
            bool extended = true;
            while (extended) {
                extended = false;
                for (size_t s = 0; s < segs.size(); ++s) {
                    if (used[s]) continue;
                    const auto head = quantize(chain.front());
                    const auto tail = quantize(chain.back());
                    const auto a = quantize(segs[s].first);
                    const auto b = quantize(segs[s].second);
                    if (a == tail) {
                        chain.push_back(segs[s].second);
                    } else if (b == tail) {
                        chain.push_back(segs[s].first);
                    } else if (a == head) {
                        chain.insert(chain.begin(), segs[s].second);
                    } else if (b == head) {
                        chain.insert(chain.begin(), segs[s].first);
                    } else {
                        continue;
                    }
                    used[s] = true;
                    extended = true;
                }
            }
            bp.polylines.push_back(std::move(chain));
        }
        out.push_back(std::move(bp));
    }
    return out;
}

BorderSampleSet sample_border_strength(const BorderStrengthField& field,
                                       const std::vector<BorderPolyline>& polylines,
                                       const AntennaRegistry& reg,
                                       double spacing_km, int k_neighbors) {
    // antennas with a defined s, in projected coordinates
    const Projection proj(reg.centroid());
    std::vector<XY> pts;
    std::vector<double> vals;
    for (size_t i = 0; i < field.node_ids.size(); ++i) {
        if (!field.s[i]) continue;
        const int idx = reg.index_of(field.node_ids[i]);
        if (idx < 0) continue;
        pts.push_back(proj.project(reg.position(idx)));
        vals.push_back(*field.s[i]);
    }
    if (pts.empty()) throw ValidationError("no antennas with defined strength");
    const int k = std::min<int>(k_neighbors, static_cast<int>(pts.size()));

    auto interpolate = [&](const XY& p) {
        std::vector<std::pair<double, int>> dist;
        dist.reserve(pts.size());
        for (size_t i = 0; i < pts.size(); ++i)
            dist.push_back({std::hypot(pts[i].x - p.x, pts[i].y - p.y),
                            static_cast<int>(i)});
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        double wsum = 0.0, vsum = 0.0;
        for (int i = 0; i < k; ++i) {
            if (dist[i].first < 1e-9) return vals[dist[i].second];
            const double w = 1.0 / dist[i].first;
            wsum += w;
            vsum += w * vals[dist[i].second];
        }
        return vsum / wsum;
    };

    BorderSampleSet out;
    std::map<BorderId, std::pair<double, long>> pos_acc;
    for (const auto& bp : polylines) {
        for (const auto& chain : bp.polylines) {
            // walk the chain placing a point every spacing_km
            double carried = 0.0;
            for (size_t v = 1; v < chain.size(); ++v) {
                const XY a = proj.project(chain[v - 1]);
                const XY b = proj.project(chain[v]);
                const double len = std::hypot(b.x - a.x, b.y - a.y);
                double along = (v == 1 && carried == 0.0) ? 0.0 : carried;
                while (along <= len) {
                    const double t = len > 0.0 ? along / len : 0.0;
                    const XY p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
                    BorderSample sample;
                    sample.position = proj.unproject(p);
                    sample.s = interpolate(p);
                    sample.border_id = bp.border_id;
                    if (sample.s > 0.0) {
                        auto& acc = pos_acc[bp.border_id];
                        acc.first += sample.s;
                        ++acc.second;
                    }
                    out.samples.push_back(std::move(sample));
                    along += spacing_km;
                }
                carried = along - len;
            }
        }
    }
    for (const auto& [id, acc] : pos_acc)
        out.mean_positive[id] = acc.first / static_cast<double>(acc.second);
    return out;
}

BorderHistogram border_histogram(const BorderSampleSet& samples, double bin_width,
                                 const std::vector<std::string>& capital_regions) {
    if (samples.samples.empty()) throw ValidationError("no border samples");
    const int n_bins = static_cast<int>(std::ceil(2.0 / bin_width));
    BorderHistogram hist;
    hist.bin_edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) hist.bin_edges[i] = -1.0 + i * bin_width;

    const std::set<std::string> capitals(capital_regions.begin(),
                                         capital_regions.end());
    auto group_of = [&](const BorderId& id) -> std::string {
        if (capitals.empty()) return id.first + "|" + id.second;
        return (capitals.count(id.first) || capitals.count(id.second)) ? "capital"
                                                                       : "other";
    };

    std::map<std::string, std::pair<double, long>> pos_acc;
    for (const auto& s : samples.samples) {
        const std::string group = group_of(s.border_id);
        auto& counts = hist.counts[group];
        if (counts.empty()) counts.assign(n_bins, 0);
        int bin = static_cast<int>((s.s + 1.0) / bin_width);
        bin = std::clamp(bin, 0, n_bins - 1);
        ++counts[bin];
        if (s.s > 0.0) {
            auto& acc = pos_acc[group];
            acc.first += s.s;
            ++acc.second;
        }
    }
    for (const auto& [group, acc] : pos_acc)
        hist.mean_positive[group] =
            acc.second > 0 ? acc.first / static_cast<double>(acc.second) : 0.0;
    return hist;
}

std::string strength_field_csv(const BorderStrengthField& field) {
    std::ostringstream ss;
    ss << "antenna_id,s_value,assigned_region,best_foreign_region\n";
    for (size_t i = 0; i < field.node_ids.size(); ++i) {
        ss << field.node_ids[i] << ",";
        if (field.s[i]) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.9g", *field.s[i]);
            ss << buf;
        }
        ss << "," << field.assigned_region[i] << "," << field.best_foreign_region[i]
           << "\n";
    }
    return ss.str();
}

std::string border_samples_geojson(const BorderSampleSet& samples) {
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = nlohmann::json::array();
    for (const auto& s : samples.samples) {
        nlohmann::json feat;
        feat["type"] = "Feature";
        feat["geometry"] = {{"type", "Point"},
                            {"coordinates", {s.position.lon, s.position.lat}}};
        feat["properties"] = {{"s", s.s},
                              {"border_id", s.border_id.first + "|" + s.border_id.second}};
        fc["features"].push_back(std::move(feat));
    }
    return fc.dump(2);
}

std::string border_histogram_csv(const BorderHistogram& hist) {
    std::ostringstream ss;
    ss << "bin_lo,bin_hi,count,border_group\n";
    for (const auto& [group, counts] : hist.counts)
        for (size_t i = 0; i < counts.size(); ++i)
            ss << hist.bin_edges[i] << "," << hist.bin_edges[i + 1] << "," << counts[i]
               << "," << group << "\n";
    return ss.str();
}

}  // namespace mobility

#include "mobility/flux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mobility/errors.hpp"

namespace mobility {

double FluxMatrix::outflow(int i) const {
    double acc = 0.0;
    for (int j = 0; j < size(); ++j)
        if (j != i) acc += at(i, j);
    return acc;
}

FluxMatrix make_flux(std::vector<std::string> regions, FluxKind kind) {
    FluxMatrix f;
    f.t.assign(regions.size() * regions.size(), 0.0);
    f.regions = std::move(regions);
    f.kind = kind;
    return f;
}

std::vector<RegionProfile> region_profiles(const AntennaRegistry& reg,
                                           const PartitionScheme& scheme) {
    std::map<std::string, RegionProfile> by_label;
    for (const auto& s : reg.sites) {
        const std::string& label = scheme.region_of(s.antenna_id);
        auto& prof = by_label[label];
        prof.region_label = label;
        prof.population += s.population;
        prof.member_antennas.push_back(s.antenna_id);
        prof.centroid.lon += s.lon * s.population;
        prof.centroid.lat += s.lat * s.population;
    }
    std::vector<RegionProfile> out;
    for (auto& [label, prof] : by_label) {
        if (prof.population > 0.0) {
            prof.centroid.lon /= prof.population;
            prof.centroid.lat /= prof.population;
        } else {
            prof.centroid = {0.0, 0.0};
            for (const auto& id : prof.member_antennas) {
                const auto& s = reg.site(reg.index_of(id));
                prof.centroid.lon += s.lon;
                prof.centroid.lat += s.lat;
            }
            const double n = static_cast<double>(prof.member_antennas.size());
            prof.centroid.lon /= n;
            prof.centroid.lat /= n;
        }
        out.push_back(std::move(prof));
    }
    return out;
}

FluxMatrix aggregate_flux(const MobilityNetwork& net, const AntennaRegistry& reg,
                          const PartitionScheme& scheme) {
    std::map<std::string, int> region_idx;
    std::vector<int> node_region(net.size());
    for (int i = 0; i < net.size(); ++i) {
        const std::string& r = scheme.region_of(net.node_ids[i]);
        auto [it, inserted] = region_idx.emplace(r, 0);
        node_region[i] = 0;  // filled after the map is complete
    }
    std::vector<std::string> regions;
    for (auto& [r, idx] : region_idx) {
        idx = static_cast<int>(regions.size());
        regions.push_back(r);
    }
    for (int i = 0; i < net.size(); ++i)
        node_region[i] = region_idx.at(scheme.region_of(net.node_ids[i]));

    FluxMatrix flux = make_flux(regions, FluxKind::Observed);
    for (int i = 0; i < net.size(); ++i)
        for (const auto& [j, w] : net.out[i])
            flux.at(node_region[i], node_region[j]) += w;
    return flux;
}

namespace {

std::vector<double> pairwise_distances(const std::vector<RegionProfile>& profiles) {
    const int n = static_cast<int>(profiles.size());
    std::vector<double> r(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = haversine_km(profiles[i].centroid, profiles[j].centroid);
            if (d <= 0.0)
                throw ValidationError("coincident centroids: " +
                                      profiles[i].region_label + " and " +
                                      profiles[j].region_label);
            r[static_cast<size_t>(i) * n + j] = d;
        }
    return r;
}

}  // namespace

FluxMatrix gravity_predict(const GravityParams& params,
                           const std::vector<RegionProfile>& profiles) {
    const int n = static_cast<int>(profiles.size());
    std::vector<std::string> labels;
    for (const auto& p : profiles) labels.push_back(p.region_label);
    const auto r = pairwise_distances(profiles);

    FluxMatrix flux = make_flux(labels, FluxKind::Modeled);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            flux.at(i, j) = params.scale *
                            std::pow(profiles[i].population, params.alpha) *
                            std::pow(profiles[j].population, params.beta_g) /
                            std::pow(r[static_cast<size_t>(i) * n + j], params.gamma);
        }
    return flux;
}

GravityParams gravity_fit(const FluxMatrix& observed,
                          const std::vector<RegionProfile>& profiles) {
    const int n = observed.size();
    if (static_cast<int>(profiles.size()) != n)
        throw ValidationError("profiles do not match flux regions");
    const auto r = pairwise_distances(profiles);

    // linear in (ln scale, alpha, beta, gamma); assemble 4x4 normal equations
    double ata[4][4] = {};
    double atb[4] = {};
    long n_rows = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double t = observed.at(i, j);
            if (t <= 0.0) continue;
            if (profiles[i].population <= 0.0 || profiles[j].population <= 0.0)
                continue;
            const double row[4] = {1.0, std::log(profiles[i].population),
                                   std::log(profiles[j].population),
                                   -std::log(r[static_cast<size_t>(i) * n + j])};
            const double y = std::log(t);
            for (int a = 0; a < 4; ++a) {
                atb[a] += row[a] * y;
                for (int b = 0; b < 4; ++b) ata[a][b] += row[a] * row[b];
            }
            ++n_rows;
        }
    if (n_rows < 10)
        throw ValidationError("need >= 10 positive off-diagonal observed entries");

    // Gaussian elimination with partial pivoting
    double m[4][5];
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) m[a][b] = ata[a][b];
        m[a][4] = atb[a];
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int row = col + 1; row < 4; ++row)
            if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
        if (std::abs(m[piv][col]) < 1e-10 * (1.0 + std::abs(ata[col][col])))
            throw NumericalError("rank-deficient gravity design matrix");
        std::swap(m[col], m[piv]);
        for (int row = 0; row < 4; ++row) {
            if (row == col) continue;
            const double f = m[row][col] / m[col][col];
            for (int k = col; k < 5; ++k) m[row][k] -= f * m[col][k];
        }
    }
    GravityParams params;
    params.scale = std::exp(m[0][4] / m[0][0]);
    params.alpha = m[1][4] / m[1][1];
    params.beta_g = m[2][4] / m[2][2];
    params.gamma = m[3][4] / m[3][3];
    return params;
}

FluxMatrix radiation_predict(const std::vector<RegionProfile>& profiles,
                             const std::vector<double>& outflows) {
    const int n = static_cast<int>(profiles.size());
    if (static_cast<int>(outflows.size()) != n)
        throw ValidationError("outflows do not match profiles");
    for (double t : outflows)
        if (t < 0.0) throw ValidationError("negative outflow");
    const auto r = pairwise_distances(profiles);

    std::vector<std::string> labels;
    for (const auto& p : profiles) labels.push_back(p.region_label);
    FluxMatrix flux = make_flux(labels, FluxKind::Modeled);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double rij = r[static_cast<size_t>(i) * n + j];
            double s_ij = 0.0;
            for (int k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                if (r[static_cast<size_t>(i) * n + k] <= rij)
                    s_ij += profiles[k].population;
            }
            const double mi = profiles[i].population;
            const double nj = profiles[j].population;
            const double denom = (mi + s_ij) * (mi + nj + s_ij);
            flux.at(i, j) = denom > 0.0 ? outflows[i] * mi * nj / denom : 0.0;
        }
    }
    return flux;
}

MapeResult mape(const FluxMatrix& observed, const FluxMatrix& modeled) {
    if (observed.regions != modeled.regions)
        throw ValidationError("flux matrices cover different region sets");
    std::vector<std::pair<int, int>> entries;
    for (int i = 0; i < observed.size(); ++i)
        for (int j = 0; j < observed.size(); ++j)
            if (i != j) entries.push_back({i, j});
    return mape_over(observed, modeled, entries);
}

MapeResult mape_over(const FluxMatrix& observed, const FluxMatrix& modeled,
                     const std::vector<std::pair<int, int>>& entries) {
    MapeResult res;
    double acc = 0.0;
    for (const auto& [i, j] : entries) {
        const double a = observed.at(i, j);
        if (a <= 0.0) {
            ++res.n_excluded_zero;
            continue;
        }
        acc += std::abs(a - modeled.at(i, j)) / a;
        ++res.n_compared;
    }
    if (res.n_compared == 0) throw ValidationError("empty MAPE comparison set");
    res.mape = 100.0 * acc / static_cast<double>(res.n_compared);
    return res;
}

EntrySplit split_intra_inter(const FluxMatrix& flux,
                             const std::map<std::string, std::string>& level1) {
    EntrySplit split;
    for (int i = 0; i < flux.size(); ++i)
        for (int j = 0; j < flux.size(); ++j) {
            if (i == j) continue;
            auto it_i = level1.find(flux.regions[i]);
            auto it_j = level1.find(flux.regions[j]);
            if (it_i == level1.end() || it_j == level1.end())
                throw ValidationError("level-1 mapping missing region");
            if (it_i->second == it_j->second)
                split.intra.push_back({i, j});
            else
                split.inter.push_back({i, j});
        }
    return split;
}

AffinityBias affinity_bias(const FluxMatrix& observed, const FluxMatrix& modeled,
                           const std::map<std::string, std::string>& level1) {
    if (observed.regions != modeled.regions)
        throw ValidationError("flux matrices cover different region sets");
    const EntrySplit split = split_intra_inter(observed, level1);

    auto mean_ratio = [&](const std::vector<std::pair<int, int>>& entries,
                          const char* which) {
        double acc = 0.0;
        long n = 0;
        for (const auto& [i, j] : entries) {
            const double t = observed.at(i, j);
            if (t <= 0.0) continue;
            acc += modeled.at(i, j) / t;
            ++n;
        }
        if (n == 0)
            throw ValidationError(std::string("empty ") + which + " comparison set");
        return acc / static_cast<double>(n);
    };

    AffinityBias bias;
    bias.s_intra = mean_ratio(split.intra, "intra");
    bias.s_inter = mean_ratio(split.inter, "inter");
    bias.d_percent = 200.0 * std::abs(bias.s_inter - bias.s_intra) /
                     (bias.s_inter + bias.s_intra);
    return bias;
}

std::string flux_csv(const FluxMatrix& flux) {
    std::ostringstream ss;
    ss << "origin,destination,value,kind\n";
    const char* kind = flux.kind == FluxKind::Observed ? "observed" : "modeled";
    for (int i = 0; i < flux.size(); ++i)
        for (int j = 0; j < flux.size(); ++j) {
            if (i == j) continue;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.9g", flux.at(i, j));
            ss << flux.regions[i] << "," << flux.regions[j] << "," << buf << ","
               << kind << "\n";
        }
    return ss.str();
}

}  // namespace mobility

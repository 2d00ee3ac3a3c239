#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mobility/borders.hpp"
#include "oracles.hpp"

using namespace mobility;

namespace {

std::vector<std::string> ids(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
    return out;
}

MobilityNetwork random_net(int n, int edges, unsigned seed) {
    std::mt19937 rng(seed);
    auto net = make_network(ids(n));
    std::uniform_int_distribution<int> node(0, n - 1);
    std::uniform_real_distribution<double> w(0.5, 5.0);
    for (int e = 0; e < edges; ++e) net.add(node(rng), node(rng), w(rng));
    return net;
}

PartitionScheme split_scheme(int n, int cut, const std::string& name = "s") {
    PartitionScheme scheme;
    scheme.name = name;
    for (int i = 0; i < n; ++i)
        scheme.assignment["n" + std::to_string(i)] = i < cut ? "L" : "R";
    return scheme;
}

}  // namespace

TEST_CASE("normalized flows") {
    auto net = make_network(ids(3));
    net.add(0, 1, 3.0);
    net.add(1, 2, 1.0);
    net.add(2, 2, 4.0);
    const auto nf = normalize_flows(net);
    CHECK(nf.at(0, 1) == doctest::Approx(3.0 / 8.0));
    CHECK(nf.at(2, 2) == doctest::Approx(0.5));
    double total = 0.0;
    for (double s : nf.row_sums) total += s;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nf.row_sums[0] == doctest::Approx(3.0 / 8.0));
    CHECK(nf.col_sums[2] == doctest::Approx(5.0 / 8.0));
    CHECK(nf.diag(2) == doctest::Approx(0.5));
}

TEST_CASE("excess matrix rows and columns sum to zero") {
    const auto net = random_net(10, 40, 2);
    const auto nf = normalize_flows(net);
    const auto e = edge_excess(nf);
    for (int i = 0; i < 10; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < 10; ++j) {
            row += e[i][j];
            col += e[j][i];
        }
        CHECK(row == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(col == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("connectedness matches the dense oracle") {
    const auto net = random_net(12, 60, 3);
    const auto nf = normalize_flows(net);
    const auto e = edge_excess(nf);
    std::mt19937 rng(4);
    std::vector<int> node_partition(12);
    for (auto& p : node_partition) p = static_cast<int>(rng() % 3);
    for (int i = 0; i < 12; ++i)
        for (int p = 0; p < 3; ++p)
            CHECK(connectedness(nf, i, node_partition, p) ==
                  doctest::Approx(oracles::connectedness_brute(nf, e, i,
                                                               node_partition, p))
                      .epsilon(1e-12));
}

TEST_CASE("strength field") {
    SUBCASE("values stay inside [-1, 1]") {
        const auto net = random_net(20, 100, 5);
        const auto field = strength_field(net, split_scheme(20, 10));
        for (const auto& s : field.s)
            if (s) {
                CHECK(*s >= -1.0 - 1e-12);
                CHECK(*s <= 1.0 + 1e-12);
            }
    }
    SUBCASE("rank-one flows give identically zero") {
        // w_ij = u_i v_j makes every excess term vanish
        auto net = make_network(ids(6));
        const double u[6] = {1, 2, 3, 1, 2, 3};
        const double v[6] = {2, 1, 1, 3, 1, 2};
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) net.add(i, j, u[i] * v[j]);
        const auto field = strength_field(net, split_scheme(6, 3));
        for (const auto& s : field.s) {
            REQUIRE(s.has_value());
            CHECK(std::abs(*s) < 1e-12);
        }
    }
    SUBCASE("a node glued to the wrong side flips sign") {
        // two dense blocks with a weak bridge
        auto net = make_network(ids(8));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) {
                    net.add(i, j, 10.0);
                    net.add(i + 4, j + 4, 10.0);
                }
        net.add(0, 4, 0.5);
        net.add(4, 0, 0.5);

        const auto good = strength_field(net, split_scheme(8, 4));
        for (const auto& s : good.s) {
            REQUIRE(s.has_value());
            CHECK(*s > 0.0);
        }

        // misassign node 3 to the other region
        auto bad_scheme = split_scheme(8, 4);
        bad_scheme.assignment["n3"] = "R";
        const auto bad = strength_field(net, bad_scheme);
        CHECK(*bad.s[3] < 0.0);
        CHECK(bad.best_foreign_region[3] == "L");
        // everyone else keeps a positive margin
        for (int i = 0; i < 8; ++i)
            if (i != 3) CHECK(*bad.s[i] > 0.0);
    }
    SUBCASE("isolated nodes are missing") {
        auto net = make_network(ids(4));
        net.add(0, 1, 1.0);
        net.add(1, 0, 1.0);
        net.add(2, 2, 1.0);  // pure self-loop: S+T-2m = 0
        const auto field = strength_field(net, split_scheme(4, 2));
        CHECK(field.s[0].has_value());
        CHECK(field.s[1].has_value());
        CHECK_FALSE(field.s[2].has_value());
        CHECK_FALSE(field.s[3].has_value());
    }
}

TEST_CASE("border polylines of a split grid") {
    // 4x4 antenna grid, left half L, right half R -> one vertical border
    std::vector<AntennaSite> sites;
    PartitionScheme scheme;
    scheme.name = "s";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const std::string id = "g" + std::to_string(i) + std::to_string(j);
            sites.push_back({id, j * 0.2, i * 0.2, 0.0});
            scheme.assignment[id] = j < 2 ? "L" : "R";
        }
    const auto reg = make_registry(sites);
    const auto tess = build_voronoi(reg);
    const auto borders = border_polylines(tess, scheme);
    REQUIRE(borders.size() == 1);
    CHECK(borders[0].border_id == BorderId{"L", "R"});
    // the border lies on the bisector x = 0.3 degrees
    double total_len = 0.0;
    for (const auto& chain : borders[0].polylines) {
        REQUIRE(chain.size() >= 2);
        for (const auto& v : chain) CHECK(v.lon == doctest::Approx(0.3).epsilon(1e-9));
        for (size_t k = 1; k < chain.size(); ++k)
            total_len += haversine_km(chain[k - 1], chain[k]);
    }
    // spans the full bounding box (0.6 deg of latitude + 2 * 0.25 margin)
    CHECK(total_len == doctest::Approx(1.1 * 111.195).epsilon(0.01));

    SUBCASE("sampling walks the border at the requested spacing") {
        auto net = make_network(tess.antenna_ids);
        std::mt19937 rng(6);
        for (int e = 0; e < 200; ++e)
            net.add(static_cast<int>(rng() % 16), static_cast<int>(rng() % 16), 1.0);
        const auto field = strength_field(net, scheme);
        const auto samples = sample_border_strength(field, borders, reg, 5.0, 8);
        CHECK(samples.samples.size() >= total_len / 5.0);
        for (const auto& s : samples.samples) {
            CHECK(s.border_id == (BorderId{"L", "R"}));
            CHECK(s.position.lon == doctest::Approx(0.3).epsilon(1e-9));
            CHECK(std::abs(s.s) <= 1.0 + 1e-12);
        }

        const auto hist = border_histogram(samples);
        long total = 0;
        for (const auto& [group, counts] : hist.counts)
            for (long c : counts) total += c;
        CHECK(total == static_cast<long>(samples.samples.size()));
        REQUIRE(hist.bin_edges.size() >= 2);
        CHECK(hist.bin_edges.front() == doctest::Approx(-1.0));
        CHECK(hist.bin_edges.back() == doctest::Approx(1.0));

        const auto geo = border_samples_geojson(samples);
        CHECK(geo.find("FeatureCollection") != std::string::npos);
        CHECK(geo.find("border_id") != std::string::npos);

        const auto hcsv = border_histogram_csv(hist);
        CHECK(hcsv.rfind("bin_lo,bin_hi,count,border_group\n", 0) == 0);
    }
}

TEST_CASE("capital grouping in the histogram") {
    BorderSampleSet set;
    auto push = [&](const std::string& a, const std::string& b, double v) {
        BorderSample s;
        s.border_id = {a, b};
        s.s = v;
        set.samples.push_back(s);
    };
    push("cap", "east", 0.2);
    push("cap", "west", -0.1);
    push("east", "west", 0.6);
    set.mean_positive[{"cap", "east"}] = 0.2;
    set.mean_positive[{"east", "west"}] = 0.6;
    const auto hist = border_histogram(set, 0.05, {"cap"});
    REQUIRE(hist.counts.count("capital") == 1);
    REQUIRE(hist.counts.count("other") == 1);
    long cap = 0, other = 0;
    for (long c : hist.counts.at("capital")) cap += c;
    for (long c : hist.counts.at("other")) other += c;
    CHECK(cap == 2);
    CHECK(other == 1);
}

TEST_CASE("strength field csv shape") {
    auto net = make_network(ids(4));
    net.add(0, 1, 1.0);
    net.add(1, 0, 1.0);
    net.add(2, 3, 1.0);
    net.add(3, 2, 1.0);
    const auto field = strength_field(net, split_scheme(4, 2));
    const auto csv = strength_field_csv(field);
    CHECK(csv.rfind("antenna_id,s_value,assigned_region,best_foreign_region\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

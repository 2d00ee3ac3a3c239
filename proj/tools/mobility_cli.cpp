// mobility: single-binary CLI over the analysis library.
//
// Exit codes: 0 success, 2 validation error, 3 parse error, 4 numerical
// failure. Every JSON report carries a provenance block (input digests, seed,
// version) so artifacts can be traced to their inputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobility/borders.hpp"
#include "mobility/distributions.hpp"
#include "mobility/errors.hpp"
#include "mobility/flux.hpp"
#include "mobility/geo.hpp"
#include "mobility/io.hpp"
#include "mobility/network.hpp"
#include "mobility/synth.hpp"
#include "mobility/threads.hpp"
#include "mobility/traj.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mobility;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string antennas;
    std::string population;
    std::string cdr;
    std::vector<std::string> partitions;  // name=path
    std::string window;                   // start:end unix seconds
    std::string out;
    std::optional<std::uint64_t> seed;
    int utc_offset = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seed) {
    cmd->add_option("--antennas", args.antennas, "antenna CSV (antenna_id,lon,lat)");
    cmd->add_option("--population", args.population,
                    "population raster CSV (lon,lat,density) with .json sidecar");
    cmd->add_option("--cdr", args.cdr, "event CSV (timestamp,user_id,antenna_id)");
    cmd->add_option("--partition", args.partitions,
                    "partition scheme as name=path (repeatable)");
    cmd->add_option("--window", args.window,
                    "restrict events to [start:end) unix seconds");
    cmd->add_option("--out", args.out, "output directory")->required();
    cmd->add_option("--utc-offset", args.utc_offset,
                    "local-time offset in hours for temporal profiles");
    if (with_seed)
        cmd->add_option("--seed", args.seed, "random seed (required)")->required();
}

struct LoadedInputs {
    AntennaRegistry registry;
    std::vector<Trajectory> trajectories;
    long dropped_events = 0;
    std::map<std::string, PartitionScheme> schemes;  // insertion-name keyed
    std::vector<std::string> scheme_order;
    json provenance_inputs = json::object();
};

std::pair<std::string, std::string> split_name_path(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
        throw ValidationError("--partition expects name=path, got '" + arg + "'");
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::pair<std::int64_t, std::int64_t> parse_window(const std::string& w) {
    const auto colon = w.find(':');
    if (colon == std::string::npos)
        throw ValidationError("--window expects start:end, got '" + w + "'");
    try {
        const std::int64_t lo = std::stoll(w.substr(0, colon));
        const std::int64_t hi = std::stoll(w.substr(colon + 1));
        if (hi <= lo) throw ValidationError("--window is empty: " + w);
        return {lo, hi};
    } catch (const ValidationError&) {
        throw;
    } catch (...) {
        throw ValidationError("--window expects integer timestamps: " + w);
    }
}

LoadedInputs load_inputs(const CommonArgs& args, bool need_antennas, bool need_cdr) {
    LoadedInputs in;
    if (need_antennas && args.antennas.empty())
        throw ValidationError("--antennas is required for this command");
    if (need_cdr && args.cdr.empty())
        throw ValidationError("--cdr is required for this command");

    if (!args.antennas.empty()) {
        in.registry = load_antennas(args.antennas);
        in.provenance_inputs[args.antennas] = file_digest(args.antennas);
    }
    if (!args.cdr.empty()) {
        auto events = load_events(args.cdr, in.registry);
        in.trajectories = std::move(events.trajectories);
        in.dropped_events = events.dropped_unknown_antenna;
        in.provenance_inputs[args.cdr] = file_digest(args.cdr);
        if (!args.window.empty()) {
            const auto [lo, hi] = parse_window(args.window);
            for (auto& t : in.trajectories) {
                std::vector<CdrEvent> keep;
                for (const auto& e : t.events)
                    if (e.timestamp >= lo && e.timestamp < hi) keep.push_back(e);
                t.events = std::move(keep);
            }
            std::erase_if(in.trajectories,
                          [](const Trajectory& t) { return t.events.empty(); });
        }
    }
    for (const auto& arg : args.partitions) {
        const auto [name, path] = split_name_path(arg);
        if (in.schemes.count(name))
            throw ValidationError("duplicate partition name: " + name);
        auto scheme = load_partition(path, name);
        scheme.validate(in.registry);
        in.provenance_inputs[path] = file_digest(path);
        in.schemes.emplace(name, std::move(scheme));
        in.scheme_order.push_back(name);
    }
    return in;
}

json provenance(const LoadedInputs& in, const CommonArgs& args,
                const std::string& command) {
    json p;
    p["command"] = command;
    p["version"] = kVersion;
    p["inputs"] = in.provenance_inputs;
    if (args.seed) p["seed"] = *args.seed;
    if (!args.window.empty()) p["window"] = args.window;
    p["workers"] = worker_count();
    return p;
}

void write_artifact(const CommonArgs& args, const std::string& name,
                    const std::string& content) {
    fs::create_directories(args.out);
    write_file((fs::path(args.out) / name).string(), content);
}

const PartitionScheme& single_scheme(const LoadedInputs& in) {
    if (in.scheme_order.size() != 1)
        throw ValidationError("this command needs exactly one --partition");
    return in.schemes.at(in.scheme_order.front());
}

ProfileOptions profile_options(const CommonArgs& args) {
    ProfileOptions opt;
    opt.utc_offset_hours = args.utc_offset;
    return opt;
}

json fit_json(const PowerLawFit& fit) {
    return json{{"delta_r0_km", fit.delta_r0_km},
                {"beta", fit.beta},
                {"kappa_km", fit.kappa_km},
                {"log_likelihood", fit.log_likelihood},
                {"n_samples", fit.n_samples}};
}

// region label -> level-1 label, derived from member antennas; mixed regions
// are a configuration error
std::map<std::string, std::string> region_level1_map(
    const std::vector<RegionProfile>& profiles, const PartitionScheme& level1) {
    std::map<std::string, std::string> out;
    for (const auto& p : profiles) {
        std::string label;
        for (const auto& a : p.member_antennas) {
            const std::string& l = level1.region_of(a);
            if (label.empty())
                label = l;
            else if (label != l)
                throw ValidationError("region " + p.region_label +
                                      " straddles level-1 partition '" +
                                      level1.name + "'");
        }
        out[p.region_label] = label;
    }
    return out;
}

FluxMatrix model_flux(const std::string& model, const FluxMatrix& observed,
                      const std::vector<RegionProfile>& profiles,
                      GravityParams* fitted_out) {
    if (model == "gravity") {
        const GravityParams fitted = gravity_fit(observed, profiles);
        if (fitted_out) *fitted_out = fitted;
        return gravity_predict(fitted, profiles);
    }
    std::vector<double> outflows(profiles.size());
    for (int i = 0; i < observed.size(); ++i) outflows[i] = observed.outflow(i);
    return radiation_predict(profiles, outflows);
}

json mape_json(const MapeResult& r) {
    return json{{"mape_percent", r.mape},
                {"n_compared", r.n_compared},
                {"n_excluded_zero", r.n_excluded_zero}};
}

// ---------------------------------------------------------------------------

int cmd_tessellate(const CommonArgs& args) {
    auto in = load_inputs(args, true, false);
    const auto tess = build_voronoi(in.registry);
    AntennaRegistry reg = in.registry;
    json report;
    if (!args.population.empty()) {
        const auto raster = load_population_raster(args.population);
        in.provenance_inputs[args.population] = file_digest(args.population);
        const auto assigned = assign_population(tess, in.registry, raster);
        reg = assigned.registry;
        report["total_population_assigned"] = assigned.total_assigned;
        report["raster_points_outside"] = assigned.points_outside;
    }
    write_artifact(args, "tessellation.geojson", tessellation_geojson(tess, reg));

    std::string csv = "antenna_id,lon,lat,population\n";
    char buf[128];
    for (const auto& s : reg.sites) {
        std::snprintf(buf, sizeof(buf), "%s,%.7f,%.7f,%.6f\n", s.antenna_id.c_str(),
                      s.lon, s.lat, s.population);
        csv += buf;
    }
    write_artifact(args, "antenna_population.csv", csv);

    report["n_antennas"] = reg.size();
    report["n_neighbor_pairs"] = tess.neighbor_pairs.size();
    report["provenance"] = provenance(in, args, "tessellate");
    write_artifact(args, "tessellate_report.json", report.dump(2) + "\n");
    return 0;
}

int cmd_stats(const CommonArgs& args, const std::string& which) {
    auto in = load_inputs(args, true, true);
    json report;
    report["n_users"] = in.trajectories.size();
    report["dropped_unknown_antenna"] = in.dropped_events;

    if (which == "jumps") {
        std::vector<double> jumps;
        std::vector<Displacement> displacements;
        for (const auto& t : in.trajectories)
            for (auto& d : extract_displacements(t, in.registry)) {
                jumps.push_back(d.distance_km);
                displacements.push_back(std::move(d));
            }
        report["n_displacements"] = jumps.size();
        try {
            report["fit"] = fit_json(fit_truncated_power_law(jumps));
        } catch (const FitFailure& f) {
            report["fit"] = fit_json(f.best_so_far);
            report["fit_converged"] = false;
        }
        const auto pdf = estimate_pdf(jumps);
        std::string csv = "bin_lo_km,bin_hi_km,density\n";
        char buf[128];
        for (size_t i = 0; i < pdf.densities.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", pdf.bin_edges[i],
                          pdf.bin_edges[i + 1], pdf.densities[i]);
            csv += buf;
        }
        write_artifact(args, "jump_pdf.csv", csv);

        for (const auto& name : in.scheme_order) {
            const auto rep =
                per_region_fits(displacements, in.schemes.at(name), in.registry);
            json per;
            for (const auto& [region, fit] : rep.fits) per[region] = fit_json(fit);
            report["per_region"][name] = {{"fits", per},
                                          {"skipped", rep.skipped},
                                          {"beta_stddev", rep.beta_stddev}};
        }
        report["provenance"] = provenance(in, args, "stats jumps");
        write_artifact(args, "stats_jumps_report.json", report.dump(2) + "\n");
    } else if (which == "gyration") {
        std::string csv = "user_id,r_g_km,n_events\n";
        char buf[160];
        for (const auto& t : in.trajectories) {
            const auto g = radius_of_gyration(t, in.registry);
            std::snprintf(buf, sizeof(buf), "%s,%.9g,%d\n", g.user_id.c_str(),
                          g.r_g_km, g.n_events);
            csv += buf;
        }
        write_artifact(args, "gyration.csv", csv);
        report["provenance"] = provenance(in, args, "stats gyration");
        write_artifact(args, "stats_gyration_report.json", report.dump(2) + "\n");
    } else if (which == "profiles") {
        const auto opt = profile_options(args);
        const auto prob =
            displacement_probability_profile(in.trajectories, in.registry, opt);
        const auto dist = mean_distance_profile(in.trajectories, in.registry, opt);
        write_artifact(args, "profiles.csv", profiles_csv({prob, dist}));
        report["provenance"] = provenance(in, args, "stats profiles");
        write_artifact(args, "stats_profiles_report.json", report.dump(2) + "\n");
    } else if (which == "binned-profiles") {
        const auto opt = profile_options(args);
        const auto profs =
            distance_binned_profiles(in.trajectories, in.registry,
                                     default_distance_bins(), opt);
        write_artifact(args, "binned_profiles.csv", profiles_csv(profs));
        report["provenance"] = provenance(in, args, "stats binned-profiles");
        write_artifact(args, "stats_binned_profiles_report.json",
                       report.dump(2) + "\n");
    } else {
        throw ValidationError("unknown stats kind: " + which);
    }
    return 0;
}

int cmd_communities(const CommonArgs& args, const std::string& within) {
    auto in = load_inputs(args, true, true);
    const auto net = build_mobility_network(in.trajectories, in.registry);

    CommunityAssignment asg;
    json report;
    if (!within.empty()) {
        if (!in.schemes.count(within))
            throw ValidationError("--within names an unknown partition: " + within);
        const auto res = constrained_subcommunities(
            net, in.schemes.at(within), static_cast<unsigned>(*args.seed));
        asg = res.assignment;
        report["within"] = within;
        report["edgeless_regions"] = res.edgeless_regions;
    } else {
        asg = louvain(net, static_cast<unsigned>(*args.seed));
    }
    write_artifact(args, "communities.csv", communities_csv(net, asg));

    report["n_communities"] = asg.n_communities;
    report["modularity"] = modularity(net, asg);
    for (const auto& name : in.scheme_order) {
        const auto ref = labels_for(net, in.schemes.at(name));
        report["similarity"][name] = similarity_indices(asg.labels, ref);
    }
    report["provenance"] = provenance(in, args, "communities");
    write_artifact(args, "communities_report.json", report.dump(2) + "\n");
    return 0;
}

int cmd_model(const CommonArgs& args, const std::string& model,
              const std::string& scheme_name, const std::string& level1_name) {
    auto in = load_inputs(args, true, true);
    if (!in.schemes.count(scheme_name))
        throw ValidationError("unknown partition: " + scheme_name);
    const auto& scheme = in.schemes.at(scheme_name);
    const auto net = build_mobility_network(in.trajectories, in.registry);
    auto profiles = region_profiles(in.registry, scheme);
    if (!args.population.empty()) {
        const auto raster = load_population_raster(args.population);
        in.provenance_inputs[args.population] = file_digest(args.population);
        const auto tess = build_voronoi(in.registry);
        const auto assigned = assign_population(tess, in.registry, raster);
        profiles = region_profiles(assigned.registry, scheme);
    }
    const auto observed = aggregate_flux(net, in.registry, scheme);

    GravityParams fitted;
    const auto modeled = model_flux(model, observed, profiles, &fitted);

    write_artifact(args, "flux_observed.csv", flux_csv(observed));
    write_artifact(args, "flux_" + model + ".csv", flux_csv(modeled));

    json report;
    report["model"] = model;
    report["scheme"] = scheme_name;
    if (model == "gravity")
        report["params"] = {{"alpha", fitted.alpha},
                            {"beta", fitted.beta_g},
                            {"gamma", fitted.gamma},
                            {"scale", fitted.scale}};
    report["mape"] = mape_json(mape(observed, modeled));
    if (!level1_name.empty()) {
        if (!in.schemes.count(level1_name))
            throw ValidationError("unknown partition: " + level1_name);
        const auto l1 = region_level1_map(profiles, in.schemes.at(level1_name));
        const auto split = split_intra_inter(observed, l1);
        report["mape_intra"] = mape_json(mape_over(observed, modeled, split.intra));
        report["mape_inter"] = mape_json(mape_over(observed, modeled, split.inter));
    }
    report["provenance"] = provenance(in, args, "model " + model);
    write_artifact(args, "model_report.json", report.dump(2) + "\n");
    return 0;
}

int cmd_affinity(const CommonArgs& args, const std::string& model) {
    auto in = load_inputs(args, true, true);
    if (in.scheme_order.empty())
        throw ValidationError("affinity needs at least one --partition");
    const auto net = build_mobility_network(in.trajectories, in.registry);

    // flux at antenna granularity; each scheme only classifies entries
    PartitionScheme identity;
    identity.name = "antenna";
    for (const auto& s : in.registry.sites)
        identity.assignment[s.antenna_id] = s.antenna_id;
    auto reg = in.registry;
    if (!args.population.empty()) {
        const auto raster = load_population_raster(args.population);
        in.provenance_inputs[args.population] = file_digest(args.population);
        const auto tess = build_voronoi(in.registry);
        reg = assign_population(tess, in.registry, raster).registry;
    }
    const auto profiles = region_profiles(reg, identity);
    const auto observed = aggregate_flux(net, in.registry, identity);
    const auto modeled = model_flux(model, observed, profiles, nullptr);

    json report;
    report["model"] = model;
    for (const auto& name : in.scheme_order) {
        std::map<std::string, std::string> l1;
        const auto& scheme = in.schemes.at(name);
        for (const auto& s : in.registry.sites)
            l1[s.antenna_id] = scheme.region_of(s.antenna_id);
        const auto ab = affinity_bias(observed, modeled, l1);
        report["schemes"][name] = {{"s_intra", ab.s_intra},
                                   {"s_inter", ab.s_inter},
                                   {"d_percent", ab.d_percent}};
    }
    report["provenance"] = provenance(in, args, "affinity " + model);
    write_artifact(args, "affinity_report.json", report.dump(2) + "\n");
    return 0;
}

int cmd_borders(const CommonArgs& args, const std::vector<std::string>& capital) {
    auto in = load_inputs(args, true, true);
    const auto& scheme = single_scheme(in);
    const auto net = build_mobility_network(in.trajectories, in.registry);
    const auto field = strength_field(net, scheme);
    write_artifact(args, "strength_field.csv", strength_field_csv(field));

    const auto tess = build_voronoi(in.registry);
    const auto polylines = border_polylines(tess, scheme);
    const auto samples = sample_border_strength(field, polylines, in.registry);
    write_artifact(args, "border_samples.geojson", border_samples_geojson(samples));

    const auto hist = border_histogram(samples, 0.05, capital);
    write_artifact(args, "border_histogram.csv", border_histogram_csv(hist));

    json report;
    report["scheme"] = scheme.name;
    report["n_borders"] = polylines.size();
    report["n_samples"] = samples.samples.size();
    json mp;
    for (const auto& [border, v] : samples.mean_positive)
        mp[border.first + "|" + border.second] = v;
    report["mean_positive"] = mp;
    json gmp;
    for (const auto& [group, v] : hist.mean_positive) gmp[group] = v;
    report["group_mean_positive"] = gmp;
    report["provenance"] = provenance(in, args, "borders");
    write_artifact(args, "borders_report.json", report.dump(2) + "\n");
    return 0;
}

int cmd_synth(const CommonArgs& args, SocietySpec spec) {
    spec.seed = *args.seed;
    const auto bundle = generate_society(spec);
    fs::create_directories(args.out);
    write_society(bundle, args.out);

    LoadedInputs none;
    json report;
    report["n_events"] = bundle.manifest.n_events;
    report["n_trips"] = bundle.manifest.n_trips;
    report["n_inter_region_trips"] = bundle.manifest.n_inter_region_trips;
    report["provenance"] = provenance(none, args, "synth");
    write_artifact(args, "synth_report.json", report.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mobility: reconstruct mobility statistics from CDR-style event "
                 "streams and score regional partitions against them"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* tessellate = app.add_subcommand("tessellate",
                                          "Voronoi cells and population assignment");
    add_common(tessellate, args, false);

    auto* stats = app.add_subcommand("stats", "trajectory statistics");
    std::string stats_kind;
    stats->add_option("kind", stats_kind, "jumps | gyration | profiles | binned-profiles")
        ->required();
    add_common(stats, args, false);

    auto* communities = app.add_subcommand("communities",
                                           "community detection and comparison");
    std::string within;
    communities->add_option("--within", within,
                            "run detection inside each region of this partition");
    add_common(communities, args, true);

    auto* model = app.add_subcommand("model", "gravity / radiation flux models");
    std::string model_kind, model_scheme, model_level1;
    model->add_option("kind", model_kind, "gravity | radiation")
        ->required()
        ->check(CLI::IsMember({"gravity", "radiation"}));
    model->add_option("--scheme", model_scheme, "partition to aggregate flux on")
        ->required();
    model->add_option("--level1", model_level1,
                      "coarser partition for the intra/inter MAPE split");
    add_common(model, args, false);

    auto* affinity = app.add_subcommand("affinity", "regional affinity bias S and D");
    std::string affinity_model;
    affinity->add_option("kind", affinity_model, "gravity | radiation")
        ->required()
        ->check(CLI::IsMember({"gravity", "radiation"}));
    add_common(affinity, args, false);

    auto* borders = app.add_subcommand("borders", "border strength field and samples");
    std::vector<std::string> capital;
    borders->add_option("--capital", capital,
                        "region labels grouped as the capital side (repeatable)");
    add_common(borders, args, false);

    auto* synth = app.add_subcommand("synth", "generate a synthetic society");
    SocietySpec spec;
    synth->add_option("--regions", spec.n_level1_regions, "level-1 regions");
    synth->add_option("--subcommunities", spec.n_subcommunities_per_region,
                      "sub-communities per region");
    synth->add_option("--n-antennas", spec.n_antennas, "antenna count");
    synth->add_option("--users", spec.n_users, "user count");
    synth->add_option("--days", spec.days, "simulated days");
    synth->add_option("--rho", spec.intra_affinity_rho,
                      "probability a trip stays in the home region");
    synth->add_option("--colocated-groups", spec.n_colocated_groups,
                      "planted co-located antenna groups");
    add_common(synth, args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (tessellate->parsed()) return cmd_tessellate(args);
        if (stats->parsed()) return cmd_stats(args, stats_kind);
        if (communities->parsed()) return cmd_communities(args, within);
        if (model->parsed())
            return cmd_model(args, model_kind, model_scheme, model_level1);
        if (affinity->parsed()) return cmd_affinity(args, affinity_model);
        if (borders->parsed()) return cmd_borders(args, capital);
        if (synth->parsed()) return cmd_synth(args, spec);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const FitFailure& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

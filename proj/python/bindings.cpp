// Python bindings for the mobility toolkit core.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mobility/borders.hpp"
#include "mobility/distributions.hpp"
#include "mobility/errors.hpp"
#include "mobility/flux.hpp"
#include "mobility/geo.hpp"
#include "mobility/io.hpp"
#include "mobility/network.hpp"
#include "mobility/synth.hpp"
#include "mobility/traj.hpp"

namespace py = pybind11;
using namespace mobility;

PYBIND11_MODULE(_mobility, m) {
    m.doc() = "Mobility statistics from CDR-style event streams";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    // ---- geo -------------------------------------------------------------
    py::class_<LonLat>(m, "LonLat")
        .def(py::init<double, double>(), py::arg("lon") = 0.0, py::arg("lat") = 0.0)
        .def_readwrite("lon", &LonLat::lon)
        .def_readwrite("lat", &LonLat::lat)
        .def("__repr__", [](const LonLat& p) {
            return "LonLat(" + std::to_string(p.lon) + ", " + std::to_string(p.lat) + ")";
        });

    m.def("haversine_km", &haversine_km, py::arg("a"), py::arg("b"));

    py::class_<AntennaSite>(m, "AntennaSite")
        .def_readonly("antenna_id", &AntennaSite::antenna_id)
        .def_readonly("lon", &AntennaSite::lon)
        .def_readonly("lat", &AntennaSite::lat)
        .def_readonly("population", &AntennaSite::population);

    py::class_<AntennaRegistry>(m, "AntennaRegistry")
        .def_readonly("sites", &AntennaRegistry::sites)
        .def("__len__", &AntennaRegistry::size)
        .def("index_of", &AntennaRegistry::index_of, py::arg("antenna_id"));

    py::class_<VoronoiTessellation>(m, "VoronoiTessellation")
        .def_readonly("antenna_ids", &VoronoiTessellation::antenna_ids)
        .def_property_readonly("cells", [](const VoronoiTessellation& t) {
            py::list out;
            for (const auto& cell : t.cells) {
                py::list ring;
                for (const auto& v : cell) ring.append(py::make_tuple(v.lon, v.lat));
                out.append(ring);
            }
            return out;
        });

    m.def("build_voronoi", &build_voronoi, py::arg("registry"));
    m.def(
        "assign_population",
        [](const VoronoiTessellation& tess, const AntennaRegistry& reg,
           const PopulationRaster& raster) {
            const auto r = assign_population(tess, reg, raster);
            return py::make_tuple(r.registry, r.total_assigned, r.points_outside);
        },
        py::arg("tessellation"), py::arg("registry"), py::arg("raster"),
        "Returns (registry_with_population, total_assigned, points_outside).");

    py::class_<PopulationRaster>(m, "PopulationRaster")
        .def_readonly("densities", &PopulationRaster::densities)
        .def_readonly("spacing_deg", &PopulationRaster::spacing_deg);

    py::class_<PartitionScheme>(m, "PartitionScheme")
        .def(py::init([](const std::string& name,
                         const std::map<std::string, std::string>& assignment) {
                 PartitionScheme s;
                 s.name = name;
                 s.assignment.insert(assignment.begin(), assignment.end());
                 return s;
             }),
             py::arg("name"), py::arg("assignment"))
        .def_readonly("name", &PartitionScheme::name)
        .def_property_readonly("assignment",
                               [](const PartitionScheme& s) {
                                   return std::map<std::string, std::string>(
                                       s.assignment.begin(), s.assignment.end());
                               })
        .def("region_of", &PartitionScheme::region_of, py::arg("antenna_id"));

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("user_id", &Trajectory::user_id)
        .def("__len__", [](const Trajectory& t) { return t.events.size(); });

    // ---- io --------------------------------------------------------------
    m.def("load_antennas", &load_antennas, py::arg("path"));
    m.def("load_population_raster", &load_population_raster, py::arg("path"));
    m.def("load_partition", &load_partition, py::arg("path"), py::arg("name"));
    m.def(
        "load_events",
        [](const std::string& path, const AntennaRegistry& reg) {
            auto r = load_events(path, reg);
            return py::make_tuple(std::move(r.trajectories), r.dropped_unknown_antenna);
        },
        py::arg("path"), py::arg("registry"),
        "Returns (trajectories, dropped_unknown_antenna).");
    m.def("tessellation_geojson", &tessellation_geojson, py::arg("tessellation"),
          py::arg("registry"));
    m.def("file_digest", &file_digest, py::arg("path"));

    // ---- trajectories ----------------------------------------------------
    py::class_<Displacement>(m, "Displacement")
        .def_readonly("user_id", &Displacement::user_id)
        .def_readonly("t_start", &Displacement::t_start)
        .def_readonly("t_end", &Displacement::t_end)
        .def_readonly("distance_km", &Displacement::distance_km);

    py::class_<GyrationSample>(m, "GyrationSample")
        .def_readonly("user_id", &GyrationSample::user_id)
        .def_readonly("r_g_km", &GyrationSample::r_g_km)
        .def_readonly("n_events", &GyrationSample::n_events);

    py::class_<ProfileOptions>(m, "ProfileOptions")
        .def(py::init<>())
        .def_readwrite("window_minutes", &ProfileOptions::window_minutes)
        .def_readwrite("step_minutes", &ProfileOptions::step_minutes)
        .def_readwrite("weekdays_only", &ProfileOptions::weekdays_only)
        .def_readwrite("utc_offset_hours", &ProfileOptions::utc_offset_hours)
        .def_readwrite("max_gap_seconds", &ProfileOptions::max_gap_seconds)
        .def_readwrite("pool_days", &ProfileOptions::pool_days);

    py::class_<TemporalProfile>(m, "TemporalProfile")
        .def_readonly("window_minutes", &TemporalProfile::window_minutes)
        .def_readonly("step_minutes", &TemporalProfile::step_minutes)
        .def_readonly("values", &TemporalProfile::values)
        .def_readonly("bin_lo_km", &TemporalProfile::bin_lo_km)
        .def_readonly("bin_hi_km", &TemporalProfile::bin_hi_km)
        .def("window_start_minute", &TemporalProfile::window_start_minute);

    m.def("extract_displacements", &extract_displacements, py::arg("trajectory"),
          py::arg("registry"));
    m.def("radius_of_gyration", &radius_of_gyration, py::arg("trajectory"),
          py::arg("registry"));
    m.def("displacement_probability_profile", &displacement_probability_profile,
          py::arg("trajectories"), py::arg("registry"),
          py::arg("options") = ProfileOptions{});
    m.def("mean_distance_profile", &mean_distance_profile, py::arg("trajectories"),
          py::arg("registry"), py::arg("options") = ProfileOptions{});
    m.def(
        "distance_binned_profiles",
        [](const std::vector<Trajectory>& trajs, const AntennaRegistry& reg,
           const std::vector<std::pair<double, double>>& bins,
           const ProfileOptions& opt) {
            std::vector<DistanceBin> bs;
            for (const auto& [lo, hi] : bins) bs.push_back({lo, hi});
            return distance_binned_profiles(trajs, reg, bs, opt);
        },
        py::arg("trajectories"), py::arg("registry"),
        py::arg("bins") = std::vector<std::pair<double, double>>{
            {0, 1}, {1, 5}, {5, 10}, {10, 20}, {20, 50}},
        py::arg("options") = ProfileOptions{});

    // ---- jump-length law -------------------------------------------------
    py::class_<PowerLawFit>(m, "PowerLawFit")
        .def_readonly("delta_r0_km", &PowerLawFit::delta_r0_km)
        .def_readonly("beta", &PowerLawFit::beta)
        .def_readonly("kappa_km", &PowerLawFit::kappa_km)
        .def_readonly("log_likelihood", &PowerLawFit::log_likelihood)
        .def_readonly("n_samples", &PowerLawFit::n_samples);

    m.def("fit_truncated_power_law", &fit_truncated_power_law, py::arg("samples"));
    m.def("sample_truncated_power_law", &sample_truncated_power_law,
          py::arg("delta_r0"), py::arg("beta"), py::arg("kappa"), py::arg("n"),
          py::arg("seed"));
    m.def(
        "estimate_pdf",
        [](const std::vector<double>& samples, int bins_per_decade) {
            const auto pdf = estimate_pdf(samples, bins_per_decade);
            return py::make_tuple(pdf.bin_edges, pdf.densities, pdf.n_samples);
        },
        py::arg("samples"), py::arg("bins_per_decade") = 10,
        "Returns (bin_edges, densities, n_samples).");

    // ---- network ---------------------------------------------------------
    py::class_<MobilityNetwork>(m, "MobilityNetwork")
        .def_readonly("node_ids", &MobilityNetwork::node_ids)
        .def("__len__", &MobilityNetwork::size)
        .def("weight", &MobilityNetwork::weight, py::arg("i"), py::arg("j"))
        .def("total_weight", &MobilityNetwork::total_weight);

    m.def("build_mobility_network", &build_mobility_network, py::arg("trajectories"),
          py::arg("registry"), py::arg("window_hours") = 24.0);
    m.def(
        "modularity",
        [](const MobilityNetwork& net, const std::vector<int>& labels) {
            CommunityAssignment asg;
            asg.labels = labels;
            for (int l : labels) {
                if (l < 0) throw ValidationError("community labels must be >= 0");
                asg.n_communities = std::max(asg.n_communities, l + 1);
            }
            return modularity(net, asg);
        },
        py::arg("network"), py::arg("labels"));
    m.def(
        "louvain",
        [](const MobilityNetwork& net, unsigned seed) { return louvain(net, seed).labels; },
        py::arg("network"), py::arg("seed"),
        "Returns one community label per node, contiguous from 0.");
    m.def("similarity_indices", &similarity_indices, py::arg("partition1"),
          py::arg("partition2"));
    m.def("labels_for", &labels_for, py::arg("network"), py::arg("scheme"));

    // ---- flux models -----------------------------------------------------
    py::class_<RegionProfile>(m, "RegionProfile")
        .def_readonly("region_label", &RegionProfile::region_label)
        .def_readonly("population", &RegionProfile::population)
        .def_readonly("centroid", &RegionProfile::centroid)
        .def_readonly("member_antennas", &RegionProfile::member_antennas);

    py::class_<FluxMatrix>(m, "FluxMatrix")
        .def_readonly("regions", &FluxMatrix::regions)
        .def("__len__", &FluxMatrix::size)
        .def("at", [](const FluxMatrix& f, int i, int j) { return f.at(i, j); },
             py::arg("i"), py::arg("j"))
        .def("outflow", &FluxMatrix::outflow, py::arg("i"));

    py::class_<GravityParams>(m, "GravityParams")
        .def(py::init<>())
        .def_readwrite("alpha", &GravityParams::alpha)
        .def_readwrite("beta_g", &GravityParams::beta_g)
        .def_readwrite("gamma", &GravityParams::gamma)
        .def_readwrite("scale", &GravityParams::scale);

    m.def("region_profiles", &region_profiles, py::arg("registry"), py::arg("scheme"));
    m.def("aggregate_flux", &aggregate_flux, py::arg("network"), py::arg("registry"),
          py::arg("scheme"));
    m.def("gravity_fit", &gravity_fit, py::arg("observed"), py::arg("profiles"));
    m.def("gravity_predict", &gravity_predict, py::arg("params"), py::arg("profiles"));
    m.def("radiation_predict", &radiation_predict, py::arg("profiles"),
          py::arg("outflows"));
    m.def(
        "mape",
        [](const FluxMatrix& obs, const FluxMatrix& mod) { return mape(obs, mod).mape; },
        py::arg("observed"), py::arg("modeled"));
    m.def(
        "affinity_bias",
        [](const FluxMatrix& obs, const FluxMatrix& mod,
           const std::map<std::string, std::string>& level1) {
            const auto r = affinity_bias(obs, mod, level1);
            return py::make_tuple(r.s_intra, r.s_inter, r.d_percent);
        },
        py::arg("observed"), py::arg("modeled"), py::arg("region_to_level1"),
        "Returns (S_intra, S_inter, D_percent).");

    // ---- borders ---------------------------------------------------------
    py::class_<BorderStrengthField>(m, "BorderStrengthField")
        .def_readonly("scheme_name", &BorderStrengthField::scheme_name)
        .def_readonly("node_ids", &BorderStrengthField::node_ids)
        .def_readonly("s", &BorderStrengthField::s)
        .def_readonly("assigned_region", &BorderStrengthField::assigned_region)
        .def_readonly("best_foreign_region", &BorderStrengthField::best_foreign_region);

    m.def("strength_field", &strength_field, py::arg("network"), py::arg("scheme"));

    // ---- synthetic society -----------------------------------------------
    py::class_<SocietySpec>(m, "SocietySpec")
        .def(py::init<>())
        .def_readwrite("seed", &SocietySpec::seed)
        .def_readwrite("n_level1_regions", &SocietySpec::n_level1_regions)
        .def_readwrite("n_subcommunities_per_region",
                       &SocietySpec::n_subcommunities_per_region)
        .def_readwrite("n_antennas", &SocietySpec::n_antennas)
        .def_readwrite("n_users", &SocietySpec::n_users)
        .def_readwrite("days", &SocietySpec::days)
        .def_readwrite("intra_affinity_rho", &SocietySpec::intra_affinity_rho);

    m.def(
        "generate_society",
        [](const SocietySpec& spec, const std::string& out_dir) {
            const auto bundle = generate_society(spec);
            write_society(bundle, out_dir);
            return py::make_tuple(bundle.manifest.n_events, bundle.manifest.n_trips,
                                  bundle.manifest.n_inter_region_trips);
        },
        py::arg("spec"), py::arg("out_dir"),
        "Writes the society files and returns (n_events, n_trips, n_inter_trips).");
}

"""Human-mobility statistics from CDR-style event streams.

Thin Python layer over the C++ core: tessellation and population assignment,
trajectory statistics, the truncated power-law jump model, mobility networks
and community detection, gravity/radiation flux models, and the
border-strength field.
"""

try:
    from . import _mobility
except ImportError:  # build-tree layout: extension module on sys.path
    import _mobility
    import sys

    sys.modules[__name__ + "._mobility"] = _mobility

from ._mobility import (  # noqa: F401
    AntennaRegistry,
    AntennaSite,
    BorderStrengthField,
    Displacement,
    FluxMatrix,
    GravityParams,
    GyrationSample,
    LonLat,
    MobilityNetwork,
    NumericalError,
    ParseError,
    PartitionScheme,
    PopulationRaster,
    PowerLawFit,
    ProfileOptions,
    RegionProfile,
    SocietySpec,
    TemporalProfile,
    Trajectory,
    ValidationError,
    VoronoiTessellation,
    affinity_bias,
    aggregate_flux,
    assign_population,
    build_mobility_network,
    build_voronoi,
    displacement_probability_profile,
    distance_binned_profiles,
    estimate_pdf,
    extract_displacements,
    file_digest,
    fit_truncated_power_law,
    generate_society,
    gravity_fit,
    gravity_predict,
    haversine_km,
    labels_for,
    load_antennas,
    load_events,
    load_partition,
    load_population_raster,
    louvain,
    mape,
    mean_distance_profile,
    modularity,
    radiation_predict,
    radius_of_gyration,
    region_profiles,
    sample_truncated_power_law,
    similarity_indices,
    strength_field,
    tessellation_geojson,
)

__version__ = "0.1.0"

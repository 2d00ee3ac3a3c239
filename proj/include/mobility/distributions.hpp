#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobility/geo.hpp"
#include "mobility/traj.hpp"

namespace mobility {

struct PdfEstimate {
    std::vector<double> bin_edges;  // ascending, size = bins + 1
    std::vector<double> densities;  // probability density per bin, 1/km
    long n_samples = 0;
};

/// Logarithmically spaced histogram density over the positive samples.
PdfEstimate estimate_pdf(const std::vector<double>& samples, int bins_per_decade = 10);

struct PowerLawFit {
    double delta_r0_km = 0.0;
    double beta = 0.0;
    double kappa_km = 0.0;
    double log_likelihood = 0.0;
    long n_samples = 0;
};

/// Thrown when simplex refinement fails to converge; carries the best point.
class FitFailure : public std::runtime_error {
public:
    FitFailure(const std::string& msg, PowerLawFit best)
        : std::runtime_error(msg), best_so_far(best) {}
    PowerLawFit best_so_far;
};

/// Maximum-likelihood fit of the density proportional to
/// (x + delta_r0)^(-beta) * exp(-x / kappa) on (0, inf).
/// Coarse log-grid search followed by Nelder-Mead refinement in log-parameter
/// space; the normalization constant is computed by adaptive quadrature.
PowerLawFit fit_truncated_power_law(const std::vector<double>& samples);

/// Z = int_0^inf (x + r0)^(-beta) exp(-x/kappa) dx, to ~1e-10 relative.
double truncated_power_law_norm(double delta_r0, double beta, double kappa);

/// Log-likelihood of the normalized density at the given parameters.
double truncated_power_law_loglik(const std::vector<double>& samples, double delta_r0,
                                  double beta, double kappa);

/// Deterministic sampler for the same density (testing and synthesis).
std::vector<double> sample_truncated_power_law(double delta_r0, double beta,
                                               double kappa, long n,
                                               unsigned long long seed);

struct RegionFitReport {
    std::map<std::string, PowerLawFit> fits;
    std::vector<std::string> skipped;  // regions with too few displacements
    double beta_stddev = 0.0;          // dispersion across fitted regions
};

enum class RegionAttribution { Origin, Destination, BothHalves };

/// Fits the jump law per region; a displacement belongs to the region of its
/// origin antenna by default. Regions with fewer than min_samples
/// displacements are skipped and reported.
RegionFitReport per_region_fits(const std::vector<Displacement>& displacements,
                                const PartitionScheme& scheme,
                                const AntennaRegistry& reg,
                                RegionAttribution attribution = RegionAttribution::Origin,
                                long min_samples = 100);

}  // namespace mobility

#include "mobility/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "mobility/errors.hpp"
#include "mobility/threads.hpp"

namespace mobility {

PdfEstimate estimate_pdf(const std::vector<double>& samples, int bins_per_decade) {
    std::vector<double> pos;
    pos.reserve(samples.size());
    for (double s : samples)
        if (s > 0.0) pos.push_back(s);
    if (pos.empty()) throw ValidationError("no positive samples");
    if (bins_per_decade < 1) throw ValidationError("bins_per_decade must be >= 1");

    const double lo = *std::min_element(pos.begin(), pos.end());
    const double hi = *std::max_element(pos.begin(), pos.end());

    PdfEstimate pdf;
    pdf.n_samples = static_cast<long>(pos.size());
    if (hi <= lo) {
        // single point mass: one bin around the value
        pdf.bin_edges = {lo * 0.999, lo * 1.001};
        pdf.densities = {1.0 / (pdf.bin_edges[1] - pdf.bin_edges[0])};
        return pdf;
    }

    const double log_lo = std::log10(lo);
    const double log_hi = std::log10(hi);
    const int n_bins =
        std::max(1, static_cast<int>(std::ceil((log_hi - log_lo) * bins_per_decade)));
    pdf.bin_edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i)
        pdf.bin_edges[i] =
            std::pow(10.0, log_lo + (log_hi - log_lo) * i / static_cast<double>(n_bins));
    pdf.bin_edges.front() = lo;
    pdf.bin_edges.back() = hi;

    std::vector<long> counts(n_bins, 0);
    for (double s : pos) {
        auto it = std::upper_bound(pdf.bin_edges.begin(), pdf.bin_edges.end(), s);
        int idx = static_cast<int>(it - pdf.bin_edges.begin()) - 1;
        idx = std::clamp(idx, 0, n_bins - 1);
        ++counts[idx];
    }
    pdf.densities.resize(n_bins);
    for (int i = 0; i < n_bins; ++i) {
        const double width = pdf.bin_edges[i + 1] - pdf.bin_edges[i];
        pdf.densities[i] = counts[i] / (static_cast<double>(pdf.n_samples) * width);
    }
    return pdf;
}

namespace {

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
    const double m = (a + b) / 2.0;
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double truncated_power_law_norm(double delta_r0, double beta, double kappa) {
    if (delta_r0 <= 0.0 || kappa <= 0.0)
        throw NumericalError("invalid power-law parameters");
    auto f = [&](double x) {
        return std::pow(x + delta_r0, -beta) * std::exp(-x / kappa);
    };
    // split at powers of ten of delta_r0 so the steep head is resolved, then
    // out to where the exponential tail is negligible
    const double upper = 40.0 * kappa + delta_r0;
    std::vector<double> knots{0.0};
    for (double k = delta_r0; k < upper; k *= 10.0) knots.push_back(k);
    knots.push_back(upper);
    std::sort(knots.begin(), knots.end());

    double total = 0.0;
    for (size_t i = 1; i < knots.size(); ++i) {
        if (knots[i] <= knots[i - 1]) continue;
        total += adaptive_simpson(f, knots[i - 1], knots[i], 1e-13 * (1.0 + total));
    }
    return total;
}

double truncated_power_law_loglik(const std::vector<double>& samples, double delta_r0,
                                  double beta, double kappa) {
    const double z = truncated_power_law_norm(delta_r0, beta, kappa);
    double sum_log = 0.0, sum_x = 0.0;
    for (double x : samples) {
        sum_log += std::log(x + delta_r0);
        sum_x += x;
    }
    const double n = static_cast<double>(samples.size());
    return -n * std::log(z) - beta * sum_log - sum_x / kappa;
}

namespace {

struct LoglikCache {
    const std::vector<double>& samples;
    double sum_x;

    explicit LoglikCache(const std::vector<double>& s) : samples(s) {
        sum_x = 0.0;
        for (double x : s) sum_x += x;
    }

    double sum_log(double r0) const {
        double acc = 0.0;
        for (double x : samples) acc += std::log(x + r0);
        return acc;
    }

    double eval(double r0, double beta, double kappa, double sum_log_r0) const {
        const double z = truncated_power_law_norm(r0, beta, kappa);
        const double n = static_cast<double>(samples.size());
        return -n * std::log(z) - beta * sum_log_r0 - sum_x / kappa;
    }
};

std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = lo * std::pow(hi / lo, i / static_cast<double>(n - 1));
    return out;
}

}  // namespace

PowerLawFit fit_truncated_power_law(const std::vector<double>& samples) {
    std::vector<double> pos;
    pos.reserve(samples.size());
    for (double s : samples)
        if (s > 0.0) pos.push_back(s);
    if (pos.size() < 100)
        throw ValidationError("need at least 100 positive samples to fit");

    LoglikCache cache(pos);

    // coarse grid: brackets the published country fits with wide margin
    const auto r0_grid = log_space(0.01, 100.0, 20);
    const auto beta_grid = log_space(0.5, 3.0, 20);
    const auto kappa_grid = log_space(1.0, 1e4, 20);

    double best_ll = -std::numeric_limits<double>::infinity();
    std::array<double, 3> best{1.0, 1.5, 100.0};
    for (double r0 : r0_grid) {
        const double slog = cache.sum_log(r0);
        for (double beta : beta_grid)
            for (double kappa : kappa_grid) {
                const double ll = cache.eval(r0, beta, kappa, slog);
                if (ll > best_ll) {
                    best_ll = ll;
                    best = {r0, beta, kappa};
                }
            }
    }

    // Nelder-Mead on log-parameters
    auto nll = [&](const std::array<double, 3>& t) {
        const double r0 = std::exp(t[0]), beta = std::exp(t[1]), kappa = std::exp(t[2]);
        return -cache.eval(r0, beta, kappa, cache.sum_log(r0));
    };
    std::array<std::array<double, 3>, 4> simplex;
    simplex[0] = {std::log(best[0]), std::log(best[1]), std::log(best[2])};
    for (int i = 1; i < 4; ++i) {
        simplex[i] = simplex[0];
        simplex[i][i - 1] += 0.1;
    }
    std::array<double, 4> fval;
    for (int i = 0; i < 4; ++i) fval[i] = nll(simplex[i]);

    const int max_iters = 10000;
    bool converged = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        // order ascending by f
        std::array<int, 4> ord{0, 1, 2, 3};
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fval[a] < fval[b]; });
        std::array<std::array<double, 3>, 4> sx;
        std::array<double, 4> sf;
        for (int i = 0; i < 4; ++i) {
            sx[i] = simplex[ord[i]];
            sf[i] = fval[ord[i]];
        }
        simplex = sx;
        fval = sf;

        double spread = 0.0;
        for (int d = 0; d < 3; ++d)
            spread = std::max(spread, std::abs(simplex[3][d] - simplex[0][d]) /
                                          (1.0 + std::abs(simplex[0][d])));
        if (spread < 1e-8) {
            converged = true;
            break;
        }

        std::array<double, 3> centroid{};
        for (int i = 0; i < 3; ++i)
            for (int d = 0; d < 3; ++d) centroid[d] += simplex[i][d] / 3.0;

        auto blend = [&](double coef) {
            std::array<double, 3> p;
            for (int d = 0; d < 3; ++d)
                p[d] = centroid[d] + coef * (simplex[3][d] - centroid[d]);
            return p;
        };

        const auto refl = blend(-1.0);
        const double f_refl = nll(refl);
        if (f_refl < fval[0]) {
            const auto exp_pt = blend(-2.0);
            const double f_exp = nll(exp_pt);
            if (f_exp < f_refl) {
                simplex[3] = exp_pt;
                fval[3] = f_exp;
            } else {
                simplex[3] = refl;
                fval[3] = f_refl;
            }
        } else if (f_refl < fval[2]) {
            simplex[3] = refl;
            fval[3] = f_refl;
        } else {
            const auto contr = blend(f_refl < fval[3] ? -0.5 : 0.5);
            const double f_contr = nll(contr);
            if (f_contr < std::min(f_refl, fval[3])) {
                simplex[3] = contr;
                fval[3] = f_contr;
            } else {
                for (int i = 1; i < 4; ++i) {
                    for (int d = 0; d < 3; ++d)
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    fval[i] = nll(simplex[i]);
                }
            }
        }
    }

    int arg = 0;
    for (int i = 1; i < 4; ++i)
        if (fval[i] < fval[arg]) arg = i;

    PowerLawFit fit;
    fit.n_samples = static_cast<long>(pos.size());
    // refinement never degrades the best grid point
    if (-fval[arg] >= best_ll) {
        fit.delta_r0_km = std::exp(simplex[arg][0]);
        fit.beta = std::exp(simplex[arg][1]);
        fit.kappa_km = std::exp(simplex[arg][2]);
        fit.log_likelihood = -fval[arg];
    } else {
        fit.delta_r0_km = best[0];
        fit.beta = best[1];
        fit.kappa_km = best[2];
        fit.log_likelihood = best_ll;
    }
    if (!converged)
        throw FitFailure("simplex refinement did not converge", fit);
    return fit;
}

std::vector<double> sample_truncated_power_law(double delta_r0, double beta,
                                               double kappa, long n,
                                               unsigned long long seed) {
    if (delta_r0 <= 0.0 || kappa <= 0.0 || beta < 0.0)
        throw ValidationError("invalid sampling parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));

    if (beta > 1.0) {
        // Pareto envelope (x + r0)^(-beta), accept with exp(-x/kappa)
        while (static_cast<long>(out.size()) < n) {
            const double u = uni(rng);
            const double x =
                delta_r0 * (std::pow(1.0 - u, -1.0 / (beta - 1.0)) - 1.0);
            if (uni(rng) <= std::exp(-x / kappa)) out.push_back(x);
        }
    } else {
        // exponential envelope, accept with ((x + r0)/r0)^(-beta)
        std::exponential_distribution<double> expd(1.0 / kappa);
        while (static_cast<long>(out.size()) < n) {
            const double x = expd(rng);
            if (uni(rng) <= std::pow((x + delta_r0) / delta_r0, -beta))
                out.push_back(x);
        }
    }
    return out;
}

RegionFitReport per_region_fits(const std::vector<Displacement>& displacements,
                                const PartitionScheme& scheme,
                                const AntennaRegistry& reg,
                                RegionAttribution attribution, long min_samples) {
    std::map<std::string, std::vector<double>> by_region;
    for (const auto& d : displacements) {
        switch (attribution) {
            case RegionAttribution::Origin:
                by_region[scheme.region_of(reg.site(d.origin).antenna_id)].push_back(
                    d.distance_km);
                break;
            case RegionAttribution::Destination:
                by_region[scheme.region_of(reg.site(d.destination).antenna_id)]
                    .push_back(d.distance_km);
                break;
            case RegionAttribution::BothHalves:
                by_region[scheme.region_of(reg.site(d.origin).antenna_id)].push_back(
                    d.distance_km);
                by_region[scheme.region_of(reg.site(d.destination).antenna_id)]
                    .push_back(d.distance_km);
                break;
        }
    }
    RegionFitReport report;
    std::vector<std::pair<std::string, const std::vector<double>*>> jobs;
    for (auto& [region, samples] : by_region) {
        if (static_cast<long>(samples.size()) < min_samples)
            report.skipped.push_back(region);
        else
            jobs.emplace_back(region, &samples);
    }
    std::vector<PowerLawFit> fitted(jobs.size());
    parallel_for(static_cast<long>(jobs.size()), [&](long i) {
        try {
            fitted[i] = fit_truncated_power_law(*jobs[i].second);
        } catch (const FitFailure& f) {
            fitted[i] = f.best_so_far;
        }
    });
    std::vector<double> betas;
    for (size_t i = 0; i < jobs.size(); ++i) {
        report.fits[jobs[i].first] = fitted[i];
        betas.push_back(fitted[i].beta);
    }
    if (betas.size() > 1) {
        double mean = 0.0;
        for (double b : betas) mean += b;
        mean /= static_cast<double>(betas.size());
        double var = 0.0;
        for (double b : betas) var += (b - mean) * (b - mean);
        report.beta_stddev = std::sqrt(var / static_cast<double>(betas.size() - 1));
    }
    return report;
}

}  // namespace mobility

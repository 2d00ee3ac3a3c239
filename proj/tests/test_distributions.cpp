#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mobility/distributions.hpp"
#include "mobility/errors.hpp"

using namespace mobility;

TEST_CASE("normalization constant against closed forms") {
    SUBCASE("beta = 0 reduces to the exponential: Z = kappa") {
        CHECK(truncated_power_law_norm(1.0, 0.0, 50.0) ==
              doctest::Approx(50.0).epsilon(1e-9));
        CHECK(truncated_power_law_norm(10.0, 0.0, 7.0) ==
              doctest::Approx(7.0).epsilon(1e-9));
    }
    SUBCASE("beta = 0.5 has an erfc closed form") {
        // Z = e^{r0/k} sqrt(pi k) erfc(sqrt(r0/k))
        for (const auto& [r0, k] : {std::pair{0.5, 20.0}, {3.0, 120.0}, {0.01, 5.0}}) {
            const double expected =
                std::exp(r0 / k) * std::sqrt(M_PI * k) * std::erfc(std::sqrt(r0 / k));
            CHECK(truncated_power_law_norm(r0, 0.5, k) ==
                  doctest::Approx(expected).epsilon(1e-8));
        }
    }
    SUBCASE("beta = 1.5 via the recurrence of the incomplete gamma") {
        // Gamma(-1/2, x) = 2 (exp(-x)/sqrt(x) - sqrt(pi) erfc(sqrt(x)))... use
        // integration by parts instead: for s = 1 - beta,
        // Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s with s = -1/2.
        const double r0 = 2.0, k = 100.0, x = r0 / k;
        const double gamma_half_x = std::sqrt(M_PI) * std::erfc(std::sqrt(x));
        const double gamma_mhalf_x =
            (gamma_half_x - std::pow(x, -0.5) * std::exp(-x)) / (-0.5);
        const double expected = std::exp(x) * std::pow(k, -0.5) * gamma_mhalf_x;
        CHECK(truncated_power_law_norm(r0, 1.5, k) ==
              doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("log likelihood matches its definition") {
    const std::vector<double> xs{0.5, 1.0, 3.7, 12.0, 55.0};
    const double r0 = 1.2, beta = 1.7, kappa = 80.0;
    const double z = truncated_power_law_norm(r0, beta, kappa);
    double expected = 0.0;
    for (double x : xs) expected += -beta * std::log(x + r0) - x / kappa;
    expected -= xs.size() * std::log(z);
    CHECK(truncated_power_law_loglik(xs, r0, beta, kappa) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sampler matches analytic moments") {
    const double r0 = 1.0, beta = 1.62, kappa = 122.0;
    const auto xs = sample_truncated_power_law(r0, beta, kappa, 200000, 99);
    REQUIRE(xs.size() == 200000);
    for (double x : xs) REQUIRE(x > 0.0);

    // E[x + r0] = Z(r0, beta - 1, kappa) / Z(r0, beta, kappa)
    const double mean_expected = truncated_power_law_norm(r0, beta - 1.0, kappa) /
                                     truncated_power_law_norm(r0, beta, kappa) -
                                 r0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    CHECK(mean == doctest::Approx(mean_expected).epsilon(0.02));

    // P(x <= r0) by quadrature of the normalized density vs empirical CDF
    const double z = truncated_power_law_norm(r0, beta, kappa);
    double cdf = 0.0;
    const int steps = 20000;
    for (int s = 0; s < steps; ++s) {
        const double x = (s + 0.5) * r0 / steps;
        cdf += std::pow(x + r0, -beta) * std::exp(-x / kappa) * (r0 / steps);
    }
    cdf /= z;
    double emp = 0.0;
    for (double x : xs)
        if (x <= r0) emp += 1.0;
    emp /= xs.size();
    CHECK(emp == doctest::Approx(cdf).epsilon(0.02));
}

TEST_CASE("sampler is deterministic in the seed") {
    const auto a = sample_truncated_power_law(1.0, 1.5, 100.0, 1000, 7);
    const auto b = sample_truncated_power_law(1.0, 1.5, 100.0, 1000, 7);
    const auto c = sample_truncated_power_law(1.0, 1.5, 100.0, 1000, 8);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("fit recovers planted parameters") {
    const double r0 = 1.0, beta = 1.62, kappa = 122.0;
    const auto xs = sample_truncated_power_law(r0, beta, kappa, 50000, 4242);
    const auto fit = fit_truncated_power_law(xs);
    CHECK(fit.beta == doctest::Approx(beta).epsilon(0.08));
    CHECK(fit.kappa_km == doctest::Approx(kappa).epsilon(0.15));
    CHECK(fit.n_samples == 50000);
    // the fitted likelihood is at least that of the planted truth
    CHECK(fit.log_likelihood >=
          truncated_power_law_loglik(xs, r0, beta, kappa) - 1e-6);
}

TEST_CASE("fit rejects bad input") {
    CHECK_THROWS_AS((void)fit_truncated_power_law({}), ValidationError);
    CHECK_THROWS_AS((void)fit_truncated_power_law({1.0, -2.0, 3.0}), ValidationError);
}

TEST_CASE("estimate_pdf integrates to one") {
    const auto xs = sample_truncated_power_law(1.0, 1.4, 60.0, 20000, 11);
    const auto pdf = estimate_pdf(xs);
    REQUIRE(pdf.bin_edges.size() == pdf.densities.size() + 1);
    double mass = 0.0;
    for (size_t i = 0; i < pdf.densities.size(); ++i)
        mass += pdf.densities[i] * (pdf.bin_edges[i + 1] - pdf.bin_edges[i]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pdf.n_samples == 20000);
}

TEST_CASE("per-region fits skip thin regions and report dispersion") {
    // two antennas per region; displacements attributed to the origin antenna
    std::vector<AntennaSite> sites{{"a0", 0, 0, 0}, {"a1", 0.5, 0, 0},
                                   {"b0", 2, 0, 0}, {"b1", 2.5, 0, 0},
                                   {"c0", 4, 0, 0}};
    const auto reg = make_registry(sites);
    PartitionScheme scheme;
    scheme.name = "test";
    scheme.assignment = {{"a0", "A"}, {"a1", "A"}, {"b0", "B"}, {"b1", "B"},
                         {"c0", "C"}};

    std::vector<Displacement> disp;
    auto add_region = [&](int origin_idx, double beta, double kappa, long n,
                          unsigned long long seed) {
        for (double x : sample_truncated_power_law(1.0, beta, kappa, n, seed)) {
            Displacement d;
            d.user_id = "u";
            d.origin = origin_idx;
            d.destination = origin_idx;
            d.distance_km = x;
            disp.push_back(d);
        }
    };
    add_region(0, 1.4, 80.0, 4000, 1);
    add_region(2, 1.9, 150.0, 4000, 2);
    add_region(4, 1.6, 100.0, 50, 3);  // below the 100-sample floor

    const auto rep = per_region_fits(disp, scheme, reg);
    REQUIRE(rep.fits.count("A") == 1);
    REQUIRE(rep.fits.count("B") == 1);
    CHECK(rep.fits.count("C") == 0);
    REQUIRE(rep.skipped.size() == 1);
    CHECK(rep.skipped[0] == "C");
    CHECK(rep.fits.at("A").beta == doctest::Approx(1.4).epsilon(0.15));
    CHECK(rep.fits.at("B").beta == doctest::Approx(1.9).epsilon(0.15));

    const double mean = (rep.fits.at("A").beta + rep.fits.at("B").beta) / 2.0;
    // sample (n - 1) variance across the two fitted regions
    const double var = std::pow(rep.fits.at("A").beta - mean, 2) +
                       std::pow(rep.fits.at("B").beta - mean, 2);
    CHECK(rep.beta_stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
}

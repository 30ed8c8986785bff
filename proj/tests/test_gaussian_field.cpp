#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homoglab/fft.hpp"
#include "homoglab/gaussian_field.hpp"
#include "homoglab/grid.hpp"

using namespace homog;

namespace {

// Inverse transform of the clamped density: the covariance the sampler
// actually realizes on the torus.
ScalarField implied_covariance(const std::vector<double>& density, const PeriodicGrid& g,
                               Fft& fft) {
    std::vector<std::complex<double>> spec(density.begin(), density.end());
    ScalarField c(g);
    c.values = fft.inverse(spec);
    return c;
}

}  // namespace

TEST_CASE("spectral density rejects non-positive beta") {
    PeriodicGrid g(2, 16);
    Fft fft(g);
    CHECK_THROWS_AS(spectral_density({-1.0, 1}, g, fft), std::invalid_argument);
    CHECK_THROWS_AS(spectral_density({0.0, 1}, g, fft), std::invalid_argument);
}

TEST_CASE("near-delta covariance gives a flat density") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    auto density = spectral_density({60.0, 1}, g, fft);
    double lo = 1e300, hi = -1e300;
    for (double v : density) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi / lo <= 1.02);
}

TEST_CASE("density mean equals c(0) = 1 (Parseval at lag 0)") {
    PeriodicGrid g(2, 64);
    Fft fft(g);
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        auto density = spectral_density({beta, 1}, g, fft);
        double s = 0.0;
        for (double v : density) s += v;
        CHECK(s / static_cast<double>(g.sites()) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("density is nonnegative with zero clamped mass for this covariance family") {
    // the minimal-image periodization of the convex decreasing profile has a
    // nonnegative transform, so clamping never fires here
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        PeriodicGrid g(2, 32);
        Fft fft(g);
        std::vector<double> c(g.sites());
        CovarianceSpec spec{beta, 1};
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = spec.gamma(std::sqrt(min_image_abs2(g, i)));
        auto hat = fft.forward(c);
        for (const auto& v : hat) CHECK(v.real() >= -1e-10);
    }
}

TEST_CASE("implied covariance reproduces gamma within 2% for lags up to n/8") {
    PeriodicGrid g(2, 256);
    Fft fft(g);
    const double beta = 1.0;
    CovarianceSpec spec{beta, 1};
    auto density = spectral_density(spec, g, fft);
    auto c = implied_covariance(density, g, fft);
    for (int ell = 0; ell <= g.n / 8; ++ell) {
        const std::size_t idx = g.index({ell, 0, 0});
        const double target = spec.gamma(static_cast<double>(ell));
        CHECK(std::abs(c.values[idx] / target - 1.0) <= 0.02);
    }
    // the documented spot value: lag 8 at beta=1 is 1/9
    const double at8 = c.values[g.index({8, 0, 0})];
    CHECK(std::abs(at8 / (1.0 / 9.0) - 1.0) <= 0.02);
}

TEST_CASE("sampler matches variance and lag covariances over 10^4 samples") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    CovarianceSpec spec{2.0, 1};
    auto density = spectral_density(spec, g, fft);
    auto target = implied_covariance(density, g, fft);

    const int samples = 10000;
    const std::size_t origin = 0;
    const std::array<int, 4> lags{1, 2, 4, 8};
    double var_acc = 0.0;
    std::array<double, 4> cov_acc{};
    for (int s = 0; s < samples; ++s) {
        auto f = sample_gaussian(density, g, SampleSeed{99, static_cast<std::uint64_t>(s)}, fft);
        const double f0 = f.values[origin];
        var_acc += f0 * f0;
        for (std::size_t l = 0; l < lags.size(); ++l)
            cov_acc[l] += f0 * f.values[g.index({lags[l], 0, 0})];
    }
    const double var = var_acc / samples;
    CHECK(std::abs(var - 1.0) <= 0.05);

    for (std::size_t l = 0; l < lags.size(); ++l) {
        const double cov = cov_acc[l] / samples;
        const double tgt = target.values[g.index({lags[l], 0, 0})];
        // stderr of a product-moment estimate with unit variances
        const double se = std::sqrt((1.0 + tgt * tgt) / samples);
        CHECK(std::abs(cov - tgt) <= 3.0 * se);
    }
    // documented spot value: lag 4 at beta=2 is near 1/25
    const double cov4 = cov_acc[2] / samples;
    CHECK(std::abs(cov4 - 0.04) <= 0.01);
}

TEST_CASE("same seed reproduces the field bitwise; different index differs") {
    PeriodicGrid g(2, 32);
    Fft fft1(g), fft2(g);
    auto density = spectral_density({4.0, 1}, g, fft1);
    auto a = sample_gaussian(density, g, SampleSeed{7, 3}, fft1);
    auto b = sample_gaussian(density, g, SampleSeed{7, 3}, fft2);
    for (std::size_t i = 0; i < g.sites(); ++i) CHECK(a.values[i] == b.values[i]);
    auto c = sample_gaussian(density, g, SampleSeed{7, 4}, fft1);
    double diff = 0.0;
    for (std::size_t i = 0; i < g.sites(); ++i) diff += std::abs(a.values[i] - c.values[i]);
    CHECK(diff > 1.0);
}

TEST_CASE("logistic map at zero and at saturation") {
    PeriodicGrid g(2, 8);
    CoefficientMapSpec map;
    map.lambda = 0.25;

    ScalarField zero(g, 0.0);
    auto a0 = apply_coefficient_map(zero, map);
    for (double v : a0.a) CHECK(v == doctest::Approx(0.25 + 0.75 / 2.0).epsilon(1e-14));

    ScalarField huge(g, 1e6);
    auto a1 = apply_coefficient_map(huge, map);
    for (double v : a1.a) CHECK(std::abs(v - 1.0) <= 1e-12);
}

TEST_CASE("lognormal-clamped map with b=c and matched slopes is constant") {
    PeriodicGrid g(2, 8);
    CoefficientMapSpec map;
    map.kind = CoefficientMapKind::LognormalClamped;
    map.lambda = 0.25;
    map.b = 1.0;
    map.c = 1.0;
    map.kappa = 2.0;
    map.kappa_tilde = 2.0;
    map.m = 0.7;
    ScalarField f(g);
    for (std::size_t i = 0; i < g.sites(); ++i) f.values[i] = std::sin(0.1 * i);
    auto a = apply_coefficient_map(f, map);
    for (double v : a.a) CHECK(v == doctest::Approx(a.a[0]).epsilon(1e-14));
}

TEST_CASE("coefficient bounds certified on a random sample") {
    PeriodicGrid g(2, 64);
    Fft fft(g);
    auto density = spectral_density({1.0, 1}, g, fft);
    auto f = sample_gaussian(density, g, SampleSeed{5, 0}, fft);
    CoefficientMapSpec map;
    map.lambda = 0.25;
    auto a = apply_coefficient_map(f, map);
    CHECK(a.lower >= map.lambda);
    CHECK(a.upper <= 1.0);
    for (double v : a.a) {
        CHECK(v >= map.lambda);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("small-contrast field: delta validation and range") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    auto density = spectral_density({4.0, 1}, g, fft);
    auto f = sample_gaussian(density, g, SampleSeed{11, 0}, fft);

    CHECK_THROWS_AS(small_contrast_field(f, -0.1), DeltaOutOfRange);
    CHECK_THROWS_AS(small_contrast_field(f, 1.0), DeltaOutOfRange);

    auto id = small_contrast_field(f, 0.0);
    for (double v : id.coefficient.a) CHECK(v == 1.0);

    auto sc = small_contrast_field(f, 0.1);
    for (double v : sc.coefficient.a) {
        CHECK(v >= 0.9);
        CHECK(v <= 1.1);
    }
    for (double v : sc.atilde.values) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("centred perturbation has near-zero box mean") {
    PeriodicGrid g(2, 64);
    Fft fft(g);
    auto density = spectral_density({4.0, 1}, g, fft);
    auto f = sample_gaussian(density, g, SampleSeed{21, 0}, fft);
    auto sc = small_contrast_field(f, 0.1);
    CHECK(std::abs(sc.atilde.mean()) <= 3.0 / std::sqrt(static_cast<double>(g.sites())));
}

TEST_CASE("edge coefficients are harmonic means and respect bounds") {
    PeriodicGrid g(2, 16);
    CoefficientField a(g);
    for (std::size_t i = 0; i < g.sites(); ++i) a.a[i] = 0.25 + 0.5 * ((i * 37) % 11) / 10.0;
    auto e = edge_coefficients(a);
    for (int ax = 0; ax < 2; ++ax) {
        for (std::size_t i = 0; i < g.sites(); ++i) {
            const double u = a.a[i], v = a.a[g.shift_up(i, ax)];
            CHECK(e[ax][i] == doctest::Approx(2.0 * u * v / (u + v)).epsilon(1e-14));
            CHECK(e[ax][i] >= std::min(u, v) - 1e-14);
            CHECK(e[ax][i] <= std::max(u, v) + 1e-14);
        }
    }
}

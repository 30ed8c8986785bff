#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "homoglab/gaussian_field.hpp"
#include "homoglab/smallcontrast.hpp"

using namespace homog;

namespace {

ScalarField random_atilde(const PeriodicGrid& g, std::uint64_t seed, double beta = 4.0) {
    Fft fft(g);
    auto density = spectral_density({beta, 1}, g, fft);
    auto f = sample_gaussian(density, g, SampleSeed{seed, 0}, fft);
    return contrast_perturbation(f);
}

}  // namespace

TEST_CASE("edge mean of a constant perturbation is flat; derived data vanishes") {
    PeriodicGrid g(2, 16);
    ScalarField c(g, 0.4);
    auto v = edge_mean_times_e(c, 0);
    for (double x : v[0]) CHECK(x == doctest::Approx(0.4).epsilon(1e-14));
    for (double x : v[1]) CHECK(x == 0.0);
    Fft fft(g);
    auto ubar = first_order_semigroup(c, 0, 2.0, fft);
    for (double x : ubar.values) CHECK(std::abs(x) <= 1e-12);
}

TEST_CASE("single Fourier mode: first-order semigroup matches the symbol algebra") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    const int k0 = 3, k1 = 5;
    const double T = 1.7;
    ScalarField atilde(g);
    for (std::size_t i = 0; i < g.sites(); ++i) {
        auto x = g.coords(i);
        atilde.values[i] = std::cos(2.0 * M_PI * (k0 * x[0] + k1 * x[1]) / g.n);
    }
    auto ubar = first_order_semigroup(atilde, 0, T, fft);

    // independent amplitude computation: writing atilde = Re[e^{i k.x}], the
    // edge mean along axis 0 multiplies the amplitude by (1 + e^{i theta_0})/2,
    // the backward-difference divergence by (1 - e^{-i theta_0}), and the heat
    // multiplier by e^{-T lambda_k}
    const double th0 = 2.0 * M_PI * k0 / g.n;
    const std::complex<double> im(0.0, 1.0);
    const std::complex<double> edge = 0.5 * (1.0 + std::exp(im * th0));
    const std::complex<double> divg = 1.0 - std::exp(-im * th0);
    const double lam = laplace_symbol(g, {k0, k1, 0});
    const std::complex<double> amp = edge * divg * std::exp(-T * lam);
    for (std::size_t i = 0; i < g.sites(); ++i) {
        auto x = g.coords(i);
        const double phase = 2.0 * M_PI * (k0 * x[0] + k1 * x[1]) / g.n;
        const double expected = (amp * std::exp(im * phase)).real();
        CHECK(std::abs(ubar.values[i] - expected) <= 1e-10);
    }
}

TEST_CASE("heat multiplier composes exactly: ubar(T) damped by T equals ubar(2T)") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    auto atilde = random_atilde(g, 71);
    const double T = 3.0;
    auto u1 = first_order_semigroup(atilde, 0, T, fft);
    auto u2 = first_order_semigroup(atilde, 0, 2.0 * T, fft);
    auto spec = fft.forward(u1.values);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] *= std::exp(-T * laplace_symbol(g, g.coords(i)));
    auto damped = fft.inverse(spec);
    for (std::size_t i = 0; i < g.sites(); ++i)
        CHECK(std::abs(damped[i] - u2.values[i]) <= 1e-12);
}

TEST_CASE("first-order semigroup norm decays monotonically in T") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    auto atilde = random_atilde(g, 72);
    double prev = 1e300;
    for (double T : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double cur = first_order_semigroup(atilde, 0, T, fft).rms();
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("first-order flux average: constant perturbation gives exactly e") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    ScalarField c(g, 0.3);
    auto v = first_order_flux_average(c, 0, 16.0, 2.0, fft);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v[1]) <= 1e-12);
}

TEST_CASE("first-order flux average guards and quadrature self-consistency") {
    PeriodicGrid g(2, 32);
    Fft fft(g);
    auto atilde = random_atilde(g, 73);
    CHECK_THROWS_AS(first_order_flux_average(atilde, 0, 4.0, 3.0, fft), std::invalid_argument);
    CHECK_THROWS_AS(first_order_flux_average(atilde, 0, 4.0, 0.5, fft), std::invalid_argument);

    auto coarse = first_order_flux_average(atilde, 0, 16.0, 2.0, fft, 8);
    auto fine = first_order_flux_average(atilde, 0, 16.0, 2.0, fft, 16);
    double diff = 0.0, scale = 0.0;
    for (int ax = 0; ax < 2; ++ax) {
        diff += std::pow(fine[static_cast<std::size_t>(ax)] - coarse[static_cast<std::size_t>(ax)], 2);
        scale += std::pow(fine[static_cast<std::size_t>(ax)], 2);
    }
    CHECK(std::sqrt(diff) <= 0.02 * std::sqrt(scale));
}

TEST_CASE("oracle compare: delta validation and exact-zero guard") {
    PeriodicGrid g(2, 16);
    auto atilde = random_atilde(g, 74);
    TimeGrid tg;
    CHECK_THROWS_AS(oracle_compare(atilde, 0, 4.0, -0.1, tg), DeltaOutOfRange);
    auto rep = oracle_compare(atilde, 0, 4.0, 0.0, tg);
    CHECK(rep.exact_zero);
    CHECK(rep.rel_error == 0.0);
}

TEST_CASE("full semigroup at small contrast matches the first-order oracle") {
    PeriodicGrid g(2, 32);
    auto atilde = random_atilde(g, 75);
    TimeGrid tg;
    tg.theta = 0.02;
    tg.dt_min = 0.002;
    for (double T : {4.0, 16.0}) {
        auto rep = oracle_compare(atilde, 0, T, 0.05, tg);
        CHECK(rep.rel_error <= 0.10);
    }
}

TEST_CASE("oracle compare error shrinks under time-grid refinement") {
    PeriodicGrid g(2, 32);
    auto atilde = random_atilde(g, 76);
    TimeGrid coarse;
    coarse.theta = 0.2;
    coarse.dt_min = 0.05;
    TimeGrid fine;
    fine.theta = 0.02;
    fine.dt_min = 0.002;
    const auto rc = oracle_compare(atilde, 0, 8.0, 0.05, coarse);
    const auto rf = oracle_compare(atilde, 0, 8.0, 0.05, fine);
    CHECK(rf.rel_error < rc.rel_error);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homoglab/extrapolation.hpp"
#include "homoglab/gaussian_field.hpp"
#include "homoglab/solver.hpp"

using namespace homog;

namespace {

CoefficientField random_coefficient(const PeriodicGrid& g, std::uint64_t seed,
                                    double beta = 4.0, double lambda = 0.25) {
    Fft fft(g);
    auto density = spectral_density({beta, 1}, g, fft);
    auto f = sample_gaussian(density, g, SampleSeed{seed, 0}, fft);
    CoefficientMapSpec map;
    map.lambda = lambda;
    return apply_coefficient_map(f, map);
}

CoefficientField laminate(const PeriodicGrid& g, std::uint64_t seed, double lambda = 0.25) {
    NormalStream rng(seed);
    std::vector<double> alpha(static_cast<std::size_t>(g.n));
    for (double& v : alpha) v = lambda + (1.0 - lambda) / (1.0 + std::exp(-rng.normal()));
    CoefficientField a(g);
    for (std::size_t i = 0; i < g.sites(); ++i)
        a.a[i] = alpha[static_cast<std::size_t>(g.coords(i)[0])];
    a.lower = *std::min_element(alpha.begin(), alpha.end());
    a.upper = *std::max_element(alpha.begin(), alpha.end());
    return a;
}

double grad_l2(const VectorField& v) { return std::sqrt(field_inner(v, v)); }

}  // namespace

TEST_CASE("ladder validation and recursion base") {
    PeriodicGrid g(2, 16);
    auto a = random_coefficient(g, 51);
    EllipticSolver solver(g, a);
    CHECK_THROWS_AS(build_ladder(solver, 0, 4.0, 1, 3), std::invalid_argument);

    auto lad = build_ladder(solver, 0, 4.0, 2, 1);
    CHECK(lad.grad_level.size() == 3);
    for (int k = 0; k <= 2; ++k) {
        const auto& base = lad.extrapolant(1, k);
        for (int ax = 0; ax < 2; ++ax)
            for (std::size_t i = 0; i < g.sites(); ++i)
                CHECK(base[ax][i] == lad.grad_level[static_cast<std::size_t>(k)][ax][i]);
    }
}

TEST_CASE("second-order extrapolant is 2 phi_{2T} - phi_T fieldwise") {
    PeriodicGrid g(2, 16);
    auto a = random_coefficient(g, 52);
    EllipticSolver solver(g, a);
    auto lad = build_ladder(solver, 0, 4.0, 2, 2);
    for (int k = 0; k <= 1; ++k) {
        const auto& e2 = lad.extrapolant(2, k);
        const auto& lo = lad.grad_level[static_cast<std::size_t>(k)];
        const auto& hi = lad.grad_level[static_cast<std::size_t>(k + 1)];
        for (int ax = 0; ax < 2; ++ax)
            for (std::size_t i = 0; i < g.sites(); ++i)
                CHECK(e2[ax][i] == doctest::Approx(2.0 * hi[ax][i] - lo[ax][i]).epsilon(1e-14));
    }
}

TEST_CASE("constant coefficient: all levels vanish and the matrix is c*Id") {
    PeriodicGrid g(2, 16);
    CoefficientField c(g, 0.55);
    EllipticSolver solver(g, c);
    std::vector<ExtrapolationLadder> ladders;
    for (int dir = 0; dir < 2; ++dir) ladders.push_back(build_ladder(solver, dir, 4.0, 2, 2));
    for (const auto& lad : ladders)
        for (const auto& lvl : lad.grad_level) CHECK(grad_l2(lvl) <= 1e-10);
    for (int n : {1, 2})
        for (int k = 0; k <= 2 - n + 1 && k <= 1; ++k) {
            auto est = a_hom_extrapolated(solver.edge_coeff(), ladders, n, k);
            CHECK(est.entry(0, 0) == doctest::Approx(0.55).epsilon(1e-10));
            CHECK(est.entry(1, 1) == doctest::Approx(0.55).epsilon(1e-10));
            CHECK(std::abs(est.entry(0, 1)) <= 1e-10);
        }
}

TEST_CASE("n=1 matrix equals the direct massive bilinear formula") {
    PeriodicGrid g(2, 16);
    auto a = random_coefficient(g, 53);
    EllipticSolver solver(g, a);
    const double T0 = 8.0;
    std::vector<ExtrapolationLadder> ladders;
    for (int dir = 0; dir < 2; ++dir) ladders.push_back(build_ladder(solver, dir, T0, 0, 1));
    auto est = a_hom_extrapolated(solver.edge_coeff(), ladders, 1, 0);

    // direct recomputation from fresh massive solves
    std::vector<VectorField> grads;
    for (int dir = 0; dir < 2; ++dir)
        grads.push_back(solve_massive_corrector(solver, dir, T0).grad_phi);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double s = 0.0;
            for (int ax = 0; ax < 2; ++ax) {
                const double ei = (ax == i) ? 1.0 : 0.0;
                const double ej = (ax == j) ? 1.0 : 0.0;
                for (std::size_t site = 0; site < g.sites(); ++site)
                    s += (grads[static_cast<std::size_t>(j)][ax][site] + ej) *
                         solver.edge_coeff()[ax][site] *
                         (grads[static_cast<std::size_t>(i)][ax][site] + ei);
            }
            s /= static_cast<double>(g.sites());
            CHECK(std::abs(est.entry(j, i) - s) <= 1e-12);
        }
}

TEST_CASE("extrapolation commutes with the gradient (linearity)") {
    PeriodicGrid g(2, 16);
    auto a = random_coefficient(g, 54);
    EllipticSolver solver(g, a);
    auto lo = solve_massive_corrector(solver, 0, 4.0);
    auto hi = solve_massive_corrector(solver, 0, 8.0);
    ScalarField phi2(g);
    for (std::size_t i = 0; i < g.sites(); ++i)
        phi2.values[i] = 2.0 * hi.phi.values[i] - lo.phi.values[i];
    auto grad_of_ext = gradient(phi2);
    for (int ax = 0; ax < 2; ++ax)
        for (std::size_t i = 0; i < g.sites(); ++i) {
            const double ext_of_grad = 2.0 * hi.grad_phi[ax][i] - lo.grad_phi[ax][i];
            CHECK(grad_of_ext[ax][i] == doctest::Approx(ext_of_grad).epsilon(1e-12));
        }
}

TEST_CASE("laminate: first-order matrix error in T decreases toward the oracle") {
    PeriodicGrid g(2, 32);
    auto a = laminate(g, 55);
    EllipticSolver solver(g, a);
    std::vector<ExtrapolationLadder> ladders;
    for (int dir = 0; dir < 2; ++dir) ladders.push_back(build_ladder(solver, dir, 4.0, 4, 1));

    double inv_sum = 0.0;
    for (int x = 0; x < g.n; ++x)
        inv_sum += 1.0 / solver.edge_coeff()[0][g.index({x, 0, 0})];
    const double harm = static_cast<double>(g.n) / inv_sum;
    double arith = 0.0;
    for (double v : a.a) arith += v;
    arith /= static_cast<double>(a.a.size());

    double prev = 1e300;
    for (int k = 0; k <= 4; ++k) {
        auto est = a_hom_extrapolated(solver.edge_coeff(), ladders, 1, k);
        const double err = std::abs(est.entry(0, 0) - harm) + std::abs(est.entry(1, 1) - arith);
        CHECK(err <= prev * 1.05);
        prev = err;
    }
}

TEST_CASE("on a fixed cell, the n=2 extrapolant beats n=1 at large T") {
    PeriodicGrid g(2, 32);
    auto a = random_coefficient(g, 56);
    EllipticSolver solver(g, a);
    auto steady = solve_steady_corrector(solver, 0);
    auto lad = build_ladder(solver, 0, 32.0, 3, 2);
    // compare both orders at the top shared T = 32 * 2^2
    auto err = [&](const VectorField& grad) {
        VectorField diff(g);
        for (int ax = 0; ax < 2; ++ax)
            for (std::size_t i = 0; i < g.sites(); ++i)
                diff[ax][i] = grad[ax][i] - steady.grad_phi[ax][i];
        return grad_l2(diff);
    };
    CHECK(err(lad.extrapolant(2, 2)) < err(lad.extrapolant(1, 2)));
}

TEST_CASE("scalar resolvent model: direct values and order of accuracy") {
    CHECK(scalar_resolvent_model(1, 10.0, 1.0) == doctest::Approx(1.0 / 1.1).epsilon(1e-14));
    CHECK_THROWS_AS(scalar_resolvent_model(1, 10.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scalar_resolvent_model(1, 0.5, 1.0), std::invalid_argument);

    const double zeta = 1.0;
    for (int n : {1, 2, 3}) {
        const double T = 64.0;
        const double e1 = std::abs(scalar_resolvent_model(n, T, zeta) - 1.0 / zeta);
        const double e2 = std::abs(scalar_resolvent_model(n, 2.0 * T, zeta) - 1.0 / zeta);
        const double ratio = e1 / e2;
        CHECK(ratio >= std::pow(2.0, n) * 0.9);
        CHECK(ratio <= std::pow(2.0, n) * 1.1);
    }

    // T -> infinity limit
    CHECK(scalar_resolvent_model(2, 1e8, 2.0) == doctest::Approx(0.5).epsilon(1e-6));
}

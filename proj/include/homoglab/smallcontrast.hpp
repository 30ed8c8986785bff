#pragma once

// Closed-form first-order (in contrast delta) solutions via the lattice heat
// kernel e^{-t lambda_k}, used as an independent analytic oracle for the
// semigroup and flux modules. The lattice symbol (not the sampled continuum
// kernel) is used so the oracle agrees with the solver at order delta.

#include <cmath>
#include <stdexcept>

#include "homoglab/calculus.hpp"
#include "homoglab/fft.hpp"
#include "homoglab/gaussian_field.hpp"
#include "homoglab/grid.hpp"
#include "homoglab/semigroup.hpp"

namespace homog {

struct QuadratureNotConverged : std::runtime_error {
    explicit QuadratureNotConverged(double change)
        : std::runtime_error("time quadrature changed by " + std::to_string(change) +
                             " under refinement (> 2%)") {}
};

// Edge arithmetic mean, the O(delta) linearization of the harmonic mean of
// 1 + delta atilde.
inline VectorField edge_mean_times_e(const ScalarField& atilde, int direction) {
    const PeriodicGrid& g = atilde.grid;
    VectorField v(g);
    auto& c = v[direction];
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = 0.5 * (atilde[i] + atilde[g.shift_up(i, direction)]);
    return v;
}

// ubar(T) = heat semigroup applied to div(atilde_edge e), evaluated exactly in
// Fourier with the discrete symbols.
inline ScalarField first_order_semigroup(const ScalarField& atilde, int direction, double T,
                                         Fft& fft) {
    if (!(T > 0.0)) throw std::invalid_argument("need T > 0");
    const PeriodicGrid& g = atilde.grid;
    const ScalarField u0 = divergence(edge_mean_times_e(atilde, direction));
    auto spec = fft.forward(u0.values);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] *= std::exp(-T * laplace_symbol(g, g.coords(i)));
    ScalarField out(g);
    out.values = fft.inverse(spec);
    return out;
}

// grad ubar(t) at the origin, one Fourier evaluation.
inline std::array<double, 3> first_order_grad_at_origin(
    const std::vector<std::complex<double>>& u0_hat, const PeriodicGrid& g, double t) {
    // direct symbol sum; returns grad ubar(t, 0)
    std::array<double, 3> out{0.0, 0.0, 0.0};
    const double inv_count = 1.0 / static_cast<double>(g.sites());
    for (std::size_t i = 0; i < u0_hat.size(); ++i) {
        const auto kv = g.coords(i);
        const double damp = std::exp(-t * laplace_symbol(g, kv));
        const std::complex<double> base = u0_hat[i] * damp * inv_count;
        for (int ax = 0; ax < g.d; ++ax)
            out[static_cast<std::size_t>(ax)] +=
                (grad_symbol(kv[static_cast<std::size_t>(ax)], g.n) * base).real();
    }
    return out;
}

// qbar_r(T) at the origin: int_0^T grad ubar at heat time s + r^2/4 ds + e.
// (The Gaussian smoothing at scale r is the lattice heat flow at time r^2/4.)
// Geometric quadrature in the shifted time variable, self-checked by
// refinement; throws if halving the step changes the result by > 2%.
inline std::array<double, 3> first_order_flux_average(const ScalarField& atilde, int direction,
                                                      double T, double r, Fft& fft,
                                                      int nodes_per_doubling = 8) {
    if (!(r >= 1.0) || r > std::sqrt(T) + 1e-12)
        throw std::invalid_argument("need 1 <= r <= sqrt(T)");
    const PeriodicGrid& g = atilde.grid;
    const ScalarField u0 = divergence(edge_mean_times_e(atilde, direction));
    const auto u0_hat = fft.forward(u0.values);

    auto integral = [&](int npd) {
        // nodes tau = s + r^2/4 geometric on [r^2/4, T + r^2/4]
        const double lo = r * r / 4.0;
        const double hi = T + lo;
        const int m = std::max(3, static_cast<int>(std::ceil(npd * std::log2(hi / lo))) + 1);
        std::array<double, 3> acc{0.0, 0.0, 0.0};
        const double q = std::pow(hi / lo, 1.0 / static_cast<double>(m - 1));
        double prev_tau = lo;
        auto prev_val = first_order_grad_at_origin(u0_hat, g, lo);
        for (int j = 1; j < m; ++j) {
            const double tau = lo * std::pow(q, j);
            const auto val = first_order_grad_at_origin(u0_hat, g, tau);
            const double w = 0.5 * (tau - prev_tau);
            for (int ax = 0; ax < g.d; ++ax)
                acc[static_cast<std::size_t>(ax)] +=
                    w * (val[static_cast<std::size_t>(ax)] + prev_val[static_cast<std::size_t>(ax)]);
            prev_tau = tau;
            prev_val = val;
        }
        return acc;
    };

    const auto coarse = integral(nodes_per_doubling);
    const auto fine = integral(2 * nodes_per_doubling);
    double diff = 0.0, scale = 0.0;
    for (int ax = 0; ax < g.d; ++ax) {
        diff += std::pow(fine[static_cast<std::size_t>(ax)] - coarse[static_cast<std::size_t>(ax)], 2);
        scale += std::pow(fine[static_cast<std::size_t>(ax)], 2);
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(scale), 1e-300);
    if (scale > 1e-24 && rel > 0.02) throw QuadratureNotConverged(rel);

    std::array<double, 3> out = fine;
    out[static_cast<std::size_t>(direction)] += 1.0;  // e * g_r = e
    return out;
}

struct OracleCompareReport {
    double delta = 0.0;
    double T = 0.0;
    double rel_error = 0.0;  // ||u_full(T) - delta ubar(T)||_2 / ||delta ubar(T)||_2
    double remainder = 0.0;  // absolute ||u_full(T) - delta ubar(T)||_2
    bool exact_zero = false; // delta = 0 guard: both sides identically zero
};

// Run the full semigroup on a_delta = 1 + delta atilde and compare u(T)
// against the first-order prediction delta * ubar(T).
inline OracleCompareReport oracle_compare(const ScalarField& atilde, int direction, double T,
                                          double delta, const TimeGrid& tg,
                                          const SolverConfig& cfg = {}) {
    if (delta < 0.0 || delta >= 1.0) throw DeltaOutOfRange(delta);
    const PeriodicGrid& g = atilde.grid;
    OracleCompareReport rep;
    rep.delta = delta;
    rep.T = T;

    CoefficientField a(g);
    for (std::size_t i = 0; i < g.sites(); ++i) a.a[i] = 1.0 + delta * atilde[i];
    a.lower = 1.0 - delta;
    a.upper = 1.0 + delta;
    EllipticSolver solver(g, a);

    if (delta == 0.0) {
        rep.exact_zero = true;
        return rep;  // u(0) = div(e) = 0, both sides vanish identically
    }

    SemigroupState st = semigroup_initial_state(solver.edge_coeff(), direction);
    TimeGrid grid = tg;
    grid.t_final = T;
    const auto nodes = grid.nodes();
    for (std::size_t k = 1; k < nodes.size(); ++k)
        advance(st, nodes[k] - nodes[k - 1], solver, cfg);

    const ScalarField ubar = first_order_semigroup(atilde, direction, T, solver.fft());
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < g.sites(); ++i) {
        const double d = st.u[i] - delta * ubar[i];
        diff2 += d * d;
        ref2 += delta * ubar[i] * delta * ubar[i];
    }
    rep.remainder = std::sqrt(diff2);
    rep.rel_error = rep.remainder / std::sqrt(ref2);
    return rep;
}

}  // namespace homog

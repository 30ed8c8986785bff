#pragma once

// Parabolic semigroup d_t u = div(a grad u), u(0) = div(a e), stepped by
// implicit Euler on a geometric time grid. After each solve the new state is
// recomputed from the update formula u += dt * div(a grad u+), so the
// telescoped identity u(t) = div(q(t)) holds to rounding, with
// q(t) = a_edge (s_accum + e) and s_accum the implicit-endpoint quadrature of
// int_0^t grad u.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "homoglab/kernels.hpp"
#include "homoglab/solver.hpp"

namespace homog {

struct TimeGrid {
    double t_final = 16.0;
    double theta = 0.1;    // geometric step fraction: dt_k = max(dt_min, theta * t_k)
    double dt_min = 0.01;

    // Node list including 0, every probe time exactly, and t_final.
    std::vector<double> nodes(const std::vector<double>& probes = {}) const {
        std::vector<double> marks = probes;
        marks.push_back(t_final);
        std::sort(marks.begin(), marks.end());
        marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
        std::vector<double> out{0.0};
        double t = 0.0;
        std::size_t mi = 0;
        while (t < t_final - 1e-12) {
            double dt = std::max(dt_min, theta * t);
            while (mi < marks.size() && marks[mi] <= t + 1e-12) ++mi;
            if (mi < marks.size() && t + dt > marks[mi] - 1e-12) dt = marks[mi] - t;
            t += dt;
            out.push_back(t);
        }
        return out;
    }
};

struct SemigroupState {
    ScalarField u;         // current u_e(t)
    VectorField s_accum;   // implicit-endpoint quadrature of int_0^t grad u
    ScalarField phi_t;     // quadrature of int_0^t u
    double t = 0.0;
    int direction = 0;

    // q(t) = a_edge (s_accum + e)
    VectorField flux(const VectorField& a_edge) const {
        return assemble_flux(a_edge, s_accum, direction);
    }
};

// u(0) = div(a e) with the harmonic-mean edge interpolation; zero mean exactly.
inline ScalarField initial_data(const VectorField& a_edge, int direction) {
    return corrector_rhs(a_edge, direction);
}

inline SemigroupState semigroup_initial_state(const VectorField& a_edge, int direction) {
    SemigroupState st;
    st.direction = direction;
    st.u = initial_data(a_edge, direction);
    st.s_accum = VectorField(a_edge.grid);
    st.phi_t = ScalarField(a_edge.grid);
    return st;
}

// One implicit Euler step: solve (I - dt div a grad) u+ = u, then rebuild the
// state from the conservative update.
inline void advance(SemigroupState& st, double dt, EllipticSolver& solver,
                    const SolverConfig& cfg = {}, VectorField* grad_out = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    std::vector<double> uplus = st.u.values;  // warm start
    SolverConfig step_cfg = cfg;
    // the mass term is 1/dt after scaling: (1/dt) u+ - div a grad u+ = (1/dt) u
    std::vector<double> b(st.u.size());
    const double inv_dt = 1.0 / dt;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = inv_dt * st.u.values[i];
    solver.solve(inv_dt, b, uplus, step_cfg);

    VectorField grad_uplus(st.u.grid);
    {
        ScalarField tmp(st.u.grid);
        tmp.values = uplus;
        grad_uplus = gradient(tmp);
    }
    // conservative update keeps u = div q exact
    std::vector<double> unew = st.u.values;
    add_div_a_grad(st.u.grid, solver.edge_coeff(), uplus, dt, unew);
    st.u.values = std::move(unew);
    for (int ax = 0; ax < st.u.grid.d; ++ax)
        for (std::size_t i = 0; i < st.u.size(); ++i)
            st.s_accum[ax][i] += dt * grad_uplus[ax][i];
    for (std::size_t i = 0; i < st.u.size(); ++i) st.phi_t.values[i] += dt * uplus[i];
    st.t += dt;
    if (grad_out) *grad_out = std::move(grad_uplus);
}

struct DecayRecord {
    std::vector<double> times;
    std::vector<double> mean_u2;       // spatial mean of |u|^2
    std::vector<double> mean_grad_u2;  // spatial mean of |grad u|^2
    std::vector<double> eta_u2;        // eta_{sqrt t}-weighted |u|^2 at the origin
    std::vector<double> eta_grad_u2;
};

struct SemigroupRunResult {
    DecayRecord decay;
    // snapshots of the accumulated flux and corrector at each probe time
    std::vector<double> probe_times;
    std::vector<VectorField> q_snapshots;
    std::vector<ScalarField> phi_snapshots;
    // Laplace quadratures sum_k dt_k e^{-t_k/T} grad u(t_k), one per requested T
    std::vector<double> laplace_T;
    std::vector<VectorField> laplace_grad;
    double conservation_error = 0.0;  // max over probes of ||u - div q||_inf
};

struct SemigroupRunOptions {
    std::vector<double> probes;      // must lie on grid nodes; snapshots taken here
    std::vector<double> laplace_T;   // accumulate e^{-t/T} grad u quadratures
    bool eta_weighted = false;       // record eta_{sqrt t} weighted decay at probes
};

inline SemigroupRunResult run_semigroup(EllipticSolver& solver, int direction,
                                        const TimeGrid& tg, const SemigroupRunOptions& opt,
                                        const SolverConfig& cfg = {}) {
    const PeriodicGrid& g = solver.edge_coeff().grid;
    for (double tp : opt.probes)
        if (std::sqrt(tp) > static_cast<double>(g.n) / 8.0)
            throw ScaleTooLarge(std::sqrt(tp), g.n);

    SemigroupRunResult out;
    out.laplace_T = opt.laplace_T;
    out.laplace_grad.assign(opt.laplace_T.size(), VectorField(g));

    SemigroupState st = semigroup_initial_state(solver.edge_coeff(), direction);
    const auto nodes = tg.nodes(opt.probes);
    std::vector<double> probes = opt.probes;
    std::sort(probes.begin(), probes.end());
    std::size_t pi = 0;

    auto record = [&](double t) {
        out.decay.times.push_back(t);
        const double u2 = st.u.rms();
        out.decay.mean_u2.push_back(u2 * u2);
        VectorField gu = gradient(st.u);
        const double gu2 = gu.rms();
        out.decay.mean_grad_u2.push_back(gu2 * gu2);
        if (opt.eta_weighted && t > 0.0) {
            const KernelSpec eta{KernelKind::Exponential, std::max(1.0, std::sqrt(t))};
            ScalarField u2f(g), gu2f(g);
            for (std::size_t i = 0; i < u2f.size(); ++i) u2f[i] = st.u[i] * st.u[i];
            for (int ax = 0; ax < g.d; ++ax)
                for (std::size_t i = 0; i < gu2f.size(); ++i) gu2f[i] += gu[ax][i] * gu[ax][i];
            out.decay.eta_u2.push_back(window_average(u2f, eta, 0, solver.fft()));
            out.decay.eta_grad_u2.push_back(window_average(gu2f, eta, 0, solver.fft()));
        }
        VectorField q = st.flux(solver.edge_coeff());
        ScalarField divq = divergence(q);
        double err = 0.0;
        for (std::size_t i = 0; i < divq.size(); ++i)
            err = std::max(err, std::abs(divq[i] - st.u[i]));
        out.conservation_error = std::max(out.conservation_error, err);
        out.probe_times.push_back(t);
        out.q_snapshots.push_back(std::move(q));
        out.phi_snapshots.push_back(st.phi_t);
    };

    VectorField grad_uplus;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double dt = nodes[k] - nodes[k - 1];
        advance(st, dt, solver, cfg, opt.laplace_T.empty() ? nullptr : &grad_uplus);
        for (std::size_t li = 0; li < opt.laplace_T.size(); ++li) {
            const double w = dt * std::exp(-st.t / opt.laplace_T[li]);
            auto& acc = out.laplace_grad[li];
            for (int ax = 0; ax < g.d; ++ax)
                for (std::size_t i = 0; i < acc[ax].size(); ++i)
                    acc[ax][i] += w * grad_uplus[ax][i];
        }
        if (pi < probes.size() && std::abs(st.t - probes[pi]) < 1e-9) {
            record(st.t);
            ++pi;
        }
    }
    return out;
}

// Gaussian average of the time-dependent flux at scale r, read at the origin.
inline std::array<double, 3> flux_average(const SemigroupState& st, const VectorField& a_edge,
                                          double r, Fft& fft) {
    const PeriodicGrid& g = a_edge.grid;
    if (!(r >= 1.0) || r > std::sqrt(st.t) + 1e-9 || std::sqrt(st.t) > g.n / 8.0 + 1e-9)
        throw ScaleTooLarge(r, g.n);
    return window_average(st.flux(a_edge), KernelSpec{KernelKind::Gaussian, r}, 0, fft);
}

inline std::array<double, 3> flux_average(const VectorField& q, double r, double t, Fft& fft) {
    const PeriodicGrid& g = q.grid;
    if (!(r >= 1.0) || r > std::sqrt(t) + 1e-9 || std::sqrt(t) > g.n / 8.0 + 1e-9)
        throw ScaleTooLarge(r, g.n);
    return window_average(q, KernelSpec{KernelKind::Gaussian, r}, 0, fft);
}

// Probe q(r^2) * f_r at the origin, componentwise against the vector kernel
// f_r = grad of the integrated-heat kernel.
inline std::array<double, 3> h_weighted_flux_average(const VectorField& q_at_r2, double r,
                                                     Fft& fft) {
    const PeriodicGrid& g = q_at_r2.grid;
    const VectorField fr = make_fr_kernel(r, g);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int ax = 0; ax < g.d; ++ax) {
        auto qs = fft.forward(q_at_r2[ax]);
        auto ks = fft.forward(fr[ax]);
        for (std::size_t i = 0; i < qs.size(); ++i) qs[i] *= ks[i];
        out[static_cast<std::size_t>(ax)] = fft.inverse(qs)[0];
    }
    return out;
}

}  // namespace homog

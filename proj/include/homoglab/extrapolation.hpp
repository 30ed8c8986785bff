#pragma once

// Richardson extrapolation of massive correctors in T:
//   phi^{n+1}_T = (2^n phi^n_{2T} - phi^n_T) / (2^n - 1),  phi^1_T = phi_T,
// applied fieldwise, plus the resulting homogenized-coefficient approximations
// and the scalar resolvent model used as an order-of-accuracy oracle.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "homoglab/solver.hpp"

namespace homog {

struct ExtrapolationLadder {
    int direction = 0;
    double T0 = 4.0;
    int K = 0;  // levels T0 * 2^k, k = 0..K
    // grad_level[k] = grad phi_{T0 2^k}; extrapolants grad_ext[n-1][k] for
    // n = 1..N at T = T0 * 2^k (defined for k = 0..K+1-n)
    std::vector<VectorField> grad_level;
    std::vector<std::vector<VectorField>> grad_ext;

    double level_T(int k) const { return T0 * std::pow(2.0, k); }

    const VectorField& extrapolant(int n, int k) const {
        return grad_ext.at(static_cast<std::size_t>(n - 1)).at(static_cast<std::size_t>(k));
    }
};

inline ExtrapolationLadder build_ladder(EllipticSolver& solver, int direction, double T0, int K,
                                        int N, const SolverConfig& cfg = {}) {
    if (N > K + 1) throw std::invalid_argument("extrapolation order N must be <= K+1");
    ExtrapolationLadder lad;
    lad.direction = direction;
    lad.T0 = T0;
    lad.K = K;
    for (int k = 0; k <= K; ++k) {
        auto sol = solve_massive_corrector(solver, direction, lad.level_T(k), cfg);
        lad.grad_level.push_back(std::move(sol.grad_phi));
    }
    lad.grad_ext.resize(static_cast<std::size_t>(N));
    lad.grad_ext[0] = lad.grad_level;
    for (int n = 1; n < N; ++n) {
        const auto& prev = lad.grad_ext[static_cast<std::size_t>(n - 1)];
        auto& next = lad.grad_ext[static_cast<std::size_t>(n)];
        const double p = std::pow(2.0, n);  // recursion weight 2^n
        for (std::size_t k = 0; k + 1 < prev.size(); ++k) {
            VectorField f(prev[k].grid);
            for (int ax = 0; ax < f.grid.d; ++ax)
                for (std::size_t i = 0; i < f[ax].size(); ++i)
                    f[ax][i] = (p * prev[k + 1][ax][i] - prev[k][ax][i]) / (p - 1.0);
            next.push_back(std::move(f));
        }
    }
    return lad;
}

// e_j . abar^n_T e_i = cell average of (grad phi^n_{e_j,T} + e_j) . a (grad phi^n_{e_i,T} + e_i)
// (phi* = phi for scalar symmetric a).
inline HomogenizedEstimate a_hom_extrapolated(const VectorField& a_edge,
                                              const std::vector<ExtrapolationLadder>& ladders,
                                              int n, int k) {
    const PeriodicGrid& g = a_edge.grid;
    HomogenizedEstimate est;
    est.d = g.d;
    est.box_side = g.n;
    est.provenance = "extrapolated-n-T";
    const double inv_count = 1.0 / static_cast<double>(g.sites());
    for (int i = 0; i < g.d; ++i) {
        const VectorField& gi = ladders[static_cast<std::size_t>(i)].extrapolant(n, k);
        for (int j = 0; j < g.d; ++j) {
            const VectorField& gj = ladders[static_cast<std::size_t>(j)].extrapolant(n, k);
            double s = 0.0;
            for (int ax = 0; ax < g.d; ++ax) {
                const double ei = (ax == i) ? 1.0 : 0.0;
                const double ej = (ax == j) ? 1.0 : 0.0;
                const auto& a = a_edge[ax];
                const auto& ci = gi[ax];
                const auto& cj = gj[ax];
                for (std::size_t s2 = 0; s2 < a.size(); ++s2)
                    s += (cj[s2] + ej) * a[s2] * (ci[s2] + ei);
            }
            est.matrix[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = s * inv_count;
        }
    }
    return est;
}

// Scalar resolvent ladder g_1(zeta, T) = (zeta + 1/T)^{-1}, extrapolated by the
// same recursion; |g_n - 1/zeta| ~ T^{-n}.
inline double scalar_resolvent_model(int n, double T, double zeta) {
    if (!(zeta > 0.0) || !(T >= 1.0)) throw std::invalid_argument("need zeta > 0 and T >= 1");
    if (n == 1) return 1.0 / (zeta + 1.0 / T);
    const double p = std::pow(2.0, n - 1);
    return (p * scalar_resolvent_model(n - 1, 2.0 * T, zeta) -
            scalar_resolvent_model(n - 1, T, zeta)) / (p - 1.0);
}

}  // namespace homog

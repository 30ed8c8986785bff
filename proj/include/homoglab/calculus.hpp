#pragma once

// Discrete differential calculus on the periodic lattice. The gradient is the
// forward difference; the divergence is its exact negative adjoint (backward
// difference), so summation by parts holds to rounding and div(grad f) is the
// standard 2d+1-point Laplacian.

#include "homoglab/grid.hpp"

namespace homog {

inline VectorField gradient(const ScalarField& f) {
    VectorField g(f.grid);
    const PeriodicGrid& gr = f.grid;
    const std::size_t count = gr.sites();
    for (int ax = 0; ax < gr.d; ++ax) {
        auto& c = g[ax];
        for (std::size_t i = 0; i < count; ++i) c[i] = f.values[gr.shift_up(i, ax)] - f.values[i];
    }
    return g;
}

inline ScalarField divergence(const VectorField& v) {
    ScalarField f(v.grid);
    const PeriodicGrid& gr = v.grid;
    const std::size_t count = gr.sites();
    for (int ax = 0; ax < gr.d; ++ax) {
        const auto& c = v[ax];
        for (std::size_t i = 0; i < count; ++i) f.values[i] += c[i] - c[gr.shift_down(i, ax)];
    }
    return f;
}

// y += alpha * div(a_edge * grad(x)), the operator core shared by the solvers.
// a_edge holds one coefficient per edge (component ax at the edge x -> x+e_ax).
inline void add_div_a_grad(const PeriodicGrid& gr, const VectorField& a_edge,
                           const std::vector<double>& x, double alpha, std::vector<double>& y) {
    const std::size_t count = gr.sites();
    for (int ax = 0; ax < gr.d; ++ax) {
        const auto& a = a_edge[ax];
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t up = gr.shift_up(i, ax);
            const std::size_t dn = gr.shift_down(i, ax);
            y[i] += alpha * (a[i] * (x[up] - x[i]) - a[dn] * (x[i] - x[dn]));
        }
    }
}

}  // namespace homog

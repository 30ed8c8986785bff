#pragma once

// Smoothing kernels on the torus: Gaussian g_r, exponential eta_R, and the
// integrated-heat kernel H_r = int_1^{r^2} g_sqrt(tau) dtau. Kernels are
// sampled at lattice sites with minimal-image distance and renormalized to
// unit discrete mass; convolution is spectral.

#include <cmath>
#include <stdexcept>
#include <string>

#include "homoglab/calculus.hpp"
#include "homoglab/fft.hpp"
#include "homoglab/grid.hpp"

namespace homog {

struct ScaleTooLarge : std::runtime_error {
    ScaleTooLarge(double scale, int n)
        : std::runtime_error("kernel scale " + std::to_string(scale) + " exceeds n/8 = " +
                             std::to_string(n / 8)) {}
};

enum class KernelKind { Gaussian, Exponential, IntegratedHeat };

struct KernelSpec {
    KernelKind kind = KernelKind::Gaussian;
    double scale = 1.0;  // r or R
};

inline void check_scale(const KernelSpec& k, const PeriodicGrid& g) {
    if (k.scale <= 0.0) throw std::invalid_argument("kernel scale must be positive");
    if (k.scale > static_cast<double>(g.n) / 8.0) throw ScaleTooLarge(k.scale, g.n);
}

inline double min_image_abs2(const PeriodicGrid& g, std::size_t idx) {
    const auto x = g.coords(idx);
    double s = 0.0;
    for (int ax = 0; ax < g.d; ++ax) {
        const double m = static_cast<double>(g.min_image(x[static_cast<std::size_t>(ax)]));
        s += m * m;
    }
    return s;
}

// Unit-mass sampled kernel, centered at site 0.
inline ScalarField make_kernel(const KernelSpec& spec, const PeriodicGrid& g) {
    check_scale(spec, g);
    ScalarField k(g);
    const std::size_t count = g.sites();
    switch (spec.kind) {
        case KernelKind::Gaussian: {
            const double inv_r2 = 1.0 / (spec.scale * spec.scale);
            for (std::size_t i = 0; i < count; ++i) k.values[i] = std::exp(-min_image_abs2(g, i) * inv_r2);
            break;
        }
        case KernelKind::Exponential: {
            const double inv_r = 1.0 / spec.scale;
            for (std::size_t i = 0; i < count; ++i)
                k.values[i] = std::exp(-std::sqrt(min_image_abs2(g, i)) * inv_r);
            break;
        }
        case KernelKind::IntegratedHeat: {
            // Trapezoidal quadrature on geometric nodes tau in [1, r^2], each
            // Gaussian slice individually normalized to unit mass before the
            // final renormalization of the integral.
            const double r2 = spec.scale * spec.scale;
            if (r2 <= 1.0) throw std::invalid_argument("integrated-heat kernel needs scale > 1");
            // Relative tail error scales like |x|^2 (dlog tau)^2, so the node
            // density must be high to stay pointwise-accurate in the tail.
            const int nodes_per_doubling = 128;
            const int m = std::max(2, static_cast<int>(std::ceil(
                                          nodes_per_doubling * std::log2(r2))));
            const double q = std::pow(r2, 1.0 / static_cast<double>(m - 1));
            std::vector<double> tau(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) tau[static_cast<std::size_t>(j)] = std::pow(q, j);
            for (int j = 0; j < m; ++j) {
                const double lo = (j == 0) ? tau[0] : tau[static_cast<std::size_t>(j - 1)];
                const double hi = (j == m - 1) ? tau[static_cast<std::size_t>(j)] : tau[static_cast<std::size_t>(j + 1)];
                const double w = 0.5 * (hi - lo);
                const double t = tau[static_cast<std::size_t>(j)];
                // unit-mass Gaussian slice at scale sqrt(tau)
                double mass = 0.0;
                std::vector<double> slice(count);
                for (std::size_t i = 0; i < count; ++i) {
                    slice[i] = std::exp(-min_image_abs2(g, i) / t);
                    mass += slice[i];
                }
                const double inv_mass = 1.0 / mass;
                for (std::size_t i = 0; i < count; ++i) k.values[i] += w * slice[i] * inv_mass;
            }
            break;
        }
    }
    double mass = 0.0;
    for (double v : k.values) mass += v;
    for (double& v : k.values) v /= mass;
    return k;
}

// Periodic convolution (f * k) via FFT; the kernel must have unit mass so the
// field mean is preserved.
inline ScalarField convolve(const ScalarField& f, const ScalarField& kernel, Fft& fft) {
    auto fs = fft.forward(f.values);
    auto ks = fft.forward(kernel.values);
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= ks[i];
    ScalarField out(f.grid);
    out.values = fft.inverse(fs);
    return out;
}

inline ScalarField convolve(const ScalarField& f, const KernelSpec& spec, Fft& fft) {
    return convolve(f, make_kernel(spec, f.grid), fft);
}

inline VectorField convolve(const VectorField& f, const KernelSpec& spec, Fft& fft) {
    const ScalarField kernel = make_kernel(spec, f.grid);
    auto ks = fft.forward(kernel.values);
    VectorField out(f.grid);
    for (int ax = 0; ax < f.grid.d; ++ax) {
        auto fs = fft.forward(f[ax]);
        for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= ks[i];
        out[ax] = fft.inverse(fs);
    }
    return out;
}

// Kernel-weighted average of f read at site x: (f * k)(x) for symmetric k.
inline double window_average(const ScalarField& f, const KernelSpec& spec, std::size_t x, Fft& fft) {
    return convolve(f, spec, fft).values[x];
}

inline std::array<double, 3> window_average(const VectorField& f, const KernelSpec& spec,
                                            std::size_t x, Fft& fft) {
    const VectorField c = convolve(f, spec, fft);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int ax = 0; ax < f.grid.d; ++ax) out[static_cast<std::size_t>(ax)] = c[ax][x];
    return out;
}

// Vector averaging function f_r ~ int_1^{r^2} grad g_sqrt(tau) dtau, realized
// as the discrete gradient of the unnormalized integrated-heat kernel.
inline VectorField make_fr_kernel(double r, const PeriodicGrid& g) {
    if (r > static_cast<double>(g.n) / 16.0) throw ScaleTooLarge(r, g.n / 2);
    ScalarField h = make_kernel({KernelKind::IntegratedHeat, r}, g);
    // undo the unit-mass normalization: the paper's f_r integrates unit-mass
    // Gaussian slices over tau, total mass r^2 - 1
    const double total = r * r - 1.0;
    for (double& v : h.values) v *= total;
    return gradient(h);
}

}  // namespace homog

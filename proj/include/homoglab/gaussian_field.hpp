#pragma once

// Stationary Gaussian sampling by circulant embedding: the pointwise
// covariance c(x) = (|x|+1)^{-beta} is sampled with minimal-image distance,
// transformed, and its (clamped) Fourier density drives the sampler. Gaussian
// values are mapped sitewise to uniformly elliptic coefficients a = A(g).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "homoglab/fft.hpp"
#include "homoglab/grid.hpp"
#include "homoglab/kernels.hpp"
#include "homoglab/random.hpp"

namespace homog {

struct ClampBudgetExceeded : std::runtime_error {
    explicit ClampBudgetExceeded(double frac)
        : std::runtime_error("clamped spectral mass fraction " + std::to_string(frac) +
                             " exceeds 1% budget; box too small for this beta") {}
};

struct CovarianceSpec {
    double beta = 4.0;  // decay exponent, gamma(l) = (l+1)^{-beta}
    int components = 1;

    double gamma(double ell) const { return std::pow(ell + 1.0, -beta); }
};

// Fourier density of the minimal-image-sampled covariance, negative
// eigenvalues clamped to zero. Throws if the clamp budget (1% of total
// spectral mass) is exceeded.
inline std::vector<double> spectral_density(const CovarianceSpec& spec, const PeriodicGrid& g,
                                            Fft& fft) {
    if (spec.beta <= 0.0) throw std::invalid_argument("beta must be positive");
    std::vector<double> c(g.sites());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = spec.gamma(std::sqrt(min_image_abs2(g, i)));
    auto spec_hat = fft.forward(c);
    std::vector<double> density(c.size());
    double clamped = 0.0, total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double v = spec_hat[i].real();
        total += std::abs(v);
        if (v < 0.0) {
            clamped += -v;
            density[i] = 0.0;
        } else {
            density[i] = v;
        }
    }
    if (total > 0.0 && clamped / total > 0.01) throw ClampBudgetExceeded(clamped / total);
    return density;
}

// Mean-zero Gaussian field with the given torus density, deterministic per seed.
inline ScalarField sample_gaussian(const std::vector<double>& density, const PeriodicGrid& g,
                                   const SampleSeed& seed, Fft& fft) {
    NormalStream rng(seed);
    std::vector<double> white(g.sites());
    for (double& w : white) w = rng.normal();
    auto white_hat = fft.forward(white);
    for (std::size_t i = 0; i < white_hat.size(); ++i)
        white_hat[i] *= std::sqrt(density[i]);
    ScalarField out(g);
    out.values = fft.inverse(white_hat);
    return out;
}

enum class CoefficientMapKind { Logistic, LognormalClamped };

struct CoefficientMapSpec {
    CoefficientMapKind kind = CoefficientMapKind::Logistic;
    double lambda = 0.25;  // ellipticity constant, in (0, 1]
    double kappa = 1.0;    // logistic slope
    // lognormal-clamped parameters: a = clamp((b + e^{-kt*(t-m)})/(c + e^{-k*(t-m)}))
    double b = 1.0;
    double c = 2.0;
    double kappa_tilde = 1.0;
    double m = 0.0;

    double apply(double t) const {
        switch (kind) {
            case CoefficientMapKind::Logistic:
                return lambda + (1.0 - lambda) / (1.0 + std::exp(-kappa * t));
            case CoefficientMapKind::LognormalClamped: {
                const double num = b + std::exp(-kappa_tilde * (t - m));
                const double den = c + std::exp(-kappa * (t - m));
                return std::clamp(num / den, lambda, 1.0);
            }
        }
        return lambda;
    }
};

struct CoefficientField {
    PeriodicGrid grid;
    std::vector<double> a;   // sitewise scalar coefficient (matrix is a * Id)
    double lower = 0.0;      // certified bounds
    double upper = 1.0;

    CoefficientField() = default;
    explicit CoefficientField(const PeriodicGrid& g, double fill = 1.0)
        : grid(g), a(g.sites(), fill), lower(fill), upper(fill) {}
};

inline CoefficientField apply_coefficient_map(const ScalarField& g, const CoefficientMapSpec& map) {
    CoefficientField out(g.grid);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = map.apply(g[i]);
        out.a[i] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo < map.lambda - 1e-12 || hi > 1.0 + 1e-12)
        throw std::logic_error("coefficient map left [lambda, 1]");
    out.lower = lo;
    out.upper = hi;
    return out;
}

struct DeltaOutOfRange : std::invalid_argument {
    explicit DeltaOutOfRange(double delta)
        : std::invalid_argument("contrast delta " + std::to_string(delta) + " outside [0, 1)") {}
};

// Bounded centred perturbation atilde in [-1, 1] (logistic recentred).
inline ScalarField contrast_perturbation(const ScalarField& g, double kappa = 1.0) {
    ScalarField atilde(g.grid);
    for (std::size_t i = 0; i < g.size(); ++i)
        atilde[i] = 2.0 / (1.0 + std::exp(-kappa * g[i])) - 1.0;
    return atilde;
}

// Small-contrast coefficient 1 + delta * atilde, keeping atilde for the oracle.
struct SmallContrastField {
    CoefficientField coefficient;
    ScalarField atilde;
    double delta = 0.0;
};

inline SmallContrastField small_contrast_field(const ScalarField& g, double delta,
                                               double kappa = 1.0) {
    if (delta < 0.0 || delta >= 1.0) throw DeltaOutOfRange(delta);
    SmallContrastField out;
    out.atilde = contrast_perturbation(g, kappa);
    out.delta = delta;
    out.coefficient.grid = g.grid;
    out.coefficient.a.resize(g.size());
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = 1.0 + delta * out.atilde[i];
        out.coefficient.a[i] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    out.coefficient.lower = lo;
    out.coefficient.upper = hi;
    return out;
}

// Edge coefficients by harmonic mean of the two adjacent site values.
inline VectorField edge_coefficients(const CoefficientField& a) {
    VectorField e(a.grid);
    const std::size_t count = a.grid.sites();
    for (int ax = 0; ax < a.grid.d; ++ax) {
        auto& c = e[ax];
        for (std::size_t i = 0; i < count; ++i) {
            const double u = a.a[i];
            const double v = a.a[a.grid.shift_up(i, ax)];
            c[i] = 2.0 * u * v / (u + v);
        }
    }
    return e;
}

}  // namespace homog

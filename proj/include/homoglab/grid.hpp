#pragma once

// Periodic unit-spacing lattice and the field containers living on it.
// Sites are indexed row-major with the last axis contiguous, which is the
// layout FFTW expects for multi-dimensional transforms.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace homog {

struct PeriodicGrid {
    int d = 2;   // dimension, 1..3
    int n = 64;  // cells per axis, power of two, >= 4

    PeriodicGrid() = default;
    PeriodicGrid(int d_, int n_) : d(d_), n(n_) {
        if (d < 1 || d > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
        if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("grid side must be a power of two >= 4");
    }

    std::size_t sites() const {
        std::size_t s = 1;
        for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
        return s;
    }

    bool operator==(const PeriodicGrid& o) const { return d == o.d && n == o.n; }

    // coords[0] is the slowest axis, coords[d-1] the contiguous one.
    std::array<int, 3> coords(std::size_t idx) const {
        std::array<int, 3> x{0, 0, 0};
        for (int ax = d - 1; ax >= 0; --ax) {
            x[static_cast<std::size_t>(ax)] = static_cast<int>(idx % static_cast<std::size_t>(n));
            idx /= static_cast<std::size_t>(n);
        }
        return x;
    }

    std::size_t index(const std::array<int, 3>& x) const {
        std::size_t idx = 0;
        for (int ax = 0; ax < d; ++ax)
            idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(wrap(x[static_cast<std::size_t>(ax)]));
        return idx;
    }

    int wrap(int c) const {
        int m = c % n;
        return m < 0 ? m + n : m;
    }

    // Signed minimal-image displacement in [-n/2, n/2).
    int min_image(int c) const {
        int m = wrap(c);
        return m >= n / 2 ? m - n : m;
    }

    // Stride of axis `ax` in the linear index.
    std::size_t stride(int ax) const {
        std::size_t s = 1;
        for (int i = ax + 1; i < d; ++i) s *= static_cast<std::size_t>(n);
        return s;
    }

    // Index of the site shifted by +1 along `ax`, with periodic wrap.
    std::size_t shift_up(std::size_t idx, int ax) const {
        const std::size_t str = stride(ax);
        const std::size_t block = str * static_cast<std::size_t>(n);
        const std::size_t base = idx - idx % block;
        return base + (idx - base + str) % block;
    }

    std::size_t shift_down(std::size_t idx, int ax) const {
        const std::size_t str = stride(ax);
        const std::size_t block = str * static_cast<std::size_t>(n);
        const std::size_t base = idx - idx % block;
        return base + (idx - base + block - str) % block;
    }
};

struct ScalarField {
    PeriodicGrid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
        : grid(g), values(g.sites(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    double mean() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s / static_cast<double>(values.size());
    }

    void subtract_mean() {
        const double m = mean();
        for (double& v : values) v -= m;
    }

    // Root mean square over sites.
    double rms() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s / static_cast<double>(values.size()));
    }
};

// Edge-based vector field: component i lives on the edge from x to x+e_i.
struct VectorField {
    PeriodicGrid grid;
    std::array<std::vector<double>, 3> comp;

    VectorField() = default;
    explicit VectorField(const PeriodicGrid& g, double fill = 0.0) : grid(g) {
        for (int i = 0; i < g.d; ++i) comp[static_cast<std::size_t>(i)].assign(g.sites(), fill);
    }

    std::vector<double>& operator[](int i) { return comp[static_cast<std::size_t>(i)]; }
    const std::vector<double>& operator[](int i) const { return comp[static_cast<std::size_t>(i)]; }

    // Root mean square of the Euclidean norm over sites.
    double rms() const {
        double s = 0.0;
        for (int i = 0; i < grid.d; ++i)
            for (double v : comp[static_cast<std::size_t>(i)]) s += v * v;
        return std::sqrt(s / static_cast<double>(grid.sites()));
    }

    std::array<double, 3> mean() const {
        std::array<double, 3> m{0.0, 0.0, 0.0};
        for (int i = 0; i < grid.d; ++i) {
            double s = 0.0;
            for (double v : comp[static_cast<std::size_t>(i)]) s += v;
            m[static_cast<std::size_t>(i)] = s / static_cast<double>(grid.sites());
        }
        return m;
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// <grad f, v> summed over all sites and components (no volume normalization).
inline double field_inner(const VectorField& a, const VectorField& b) {
    double s = 0.0;
    for (int i = 0; i < a.grid.d; ++i) s += dot(a[i], b[i]);
    return s;
}

}  // namespace homog

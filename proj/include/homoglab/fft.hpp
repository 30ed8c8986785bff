#pragma once

// Thin wrapper over FFTW complex transforms. One Fft instance owns its
// buffers and plans; plan creation/destruction goes through a global mutex
// (FFTW planning is not thread-safe, execution is).

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "homoglab/grid.hpp"

namespace homog {

inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

class Fft {
public:
    explicit Fft(const PeriodicGrid& g) : grid_(g) {
        const std::size_t count = g.sites();
        in_ = fftw_alloc_complex(count);
        out_ = fftw_alloc_complex(count);
        int dims[3] = {g.n, g.n, g.n};
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fwd_ = fftw_plan_dft(g.d, dims, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(g.d, dims, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Fft() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(in_);
        fftw_free(out_);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    const PeriodicGrid& grid() const { return grid_; }

    // Unnormalized forward DFT of a real field.
    std::vector<std::complex<double>> forward(const std::vector<double>& f) {
        const std::size_t count = grid_.sites();
        for (std::size_t i = 0; i < count; ++i) {
            in_[i][0] = f[i];
            in_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        std::vector<std::complex<double>> spec(count);
        for (std::size_t i = 0; i < count; ++i) spec[i] = {out_[i][0], out_[i][1]};
        return spec;
    }

    // Inverse DFT including the 1/N normalization; returns the real part.
    std::vector<double> inverse(const std::vector<std::complex<double>>& spec) {
        const std::size_t count = grid_.sites();
        for (std::size_t i = 0; i < count; ++i) {
            in_[i][0] = spec[i].real();
            in_[i][1] = spec[i].imag();
        }
        fftw_execute(bwd_);
        const double inv = 1.0 / static_cast<double>(count);
        std::vector<double> f(count);
        for (std::size_t i = 0; i < count; ++i) f[i] = out_[i][0] * inv;
        return f;
    }

private:
    PeriodicGrid grid_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

// Forward-difference symbol of axis `ax` at mode index k_ax: e^{2*pi*i*k/n} - 1.
inline std::complex<double> grad_symbol(int k, int n) {
    const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    return {std::cos(th) - 1.0, std::sin(th)};
}

// Eigenvalue of the (2d+1)-point discrete Laplacian: sum_j 4 sin^2(pi k_j / n).
inline double laplace_symbol(const PeriodicGrid& g, const std::array<int, 3>& k) {
    double s = 0.0;
    for (int ax = 0; ax < g.d; ++ax) {
        const double x = std::sin(M_PI * static_cast<double>(k[static_cast<std::size_t>(ax)]) /
                                  static_cast<double>(g.n));
        s += 4.0 * x * x;
    }
    return s;
}

// Precomputed Laplacian symbol table over all modes (indexed like sites).
inline std::vector<double> laplace_symbol_table(const PeriodicGrid& g) {
    std::vector<double> tab(g.sites());
    for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = laplace_symbol(g, g.coords(i));
    return tab;
}

}  // namespace homog

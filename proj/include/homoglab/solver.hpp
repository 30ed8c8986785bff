#pragma once

// Corrector solves. All systems are quadratic-energy minimizations:
// (mass - div a grad) phi = div(a e), solved by preconditioned conjugate
// gradient. The preconditioner inverts the constant-coefficient operator
// (mass + abar * Laplacian) spectrally. The steady system is singular on
// constants and is solved in the mean-zero subspace.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "homoglab/calculus.hpp"
#include "homoglab/fft.hpp"
#include "homoglab/gaussian_field.hpp"
#include "homoglab/grid.hpp"

namespace homog {

struct SolverConfig {
    double rel_tol = 1e-10;
    int max_iter = 0;  // 0: use 10 * n^{d/2}
    bool precondition = true;

    int effective_max_iter(const PeriodicGrid& g) const {
        if (max_iter > 0) return max_iter;
        return static_cast<int>(10.0 * std::pow(static_cast<double>(g.n), g.d / 2.0)) + 100;
    }
};

struct NoConvergence : std::runtime_error {
    int iterations;
    double residual;
    NoConvergence(int it, double res)
        : std::runtime_error("CG did not converge: residual " + std::to_string(res) + " after " +
                             std::to_string(it) + " iterations"),
          iterations(it), residual(res) {}
};

// Workspace for one solve owner; holds the FFT used by the preconditioner.
class EllipticSolver {
public:
    EllipticSolver(const PeriodicGrid& g, const CoefficientField& a)
        : grid_(g), fft_(g), a_edge_(edge_coefficients(a)), lap_(laplace_symbol_table(g)) {
        double s = 0.0;
        for (double v : a.a) s += v;
        abar_ = s / static_cast<double>(a.a.size());
    }

    const VectorField& edge_coeff() const { return a_edge_; }
    double mean_coefficient() const { return abar_; }
    Fft& fft() { return fft_; }

    // y = (mass*I - div a grad) x
    void apply(double mass, const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t count = grid_.sites();
        y.assign(count, 0.0);
        if (mass != 0.0)
            for (std::size_t i = 0; i < count; ++i) y[i] = mass * x[i];
        add_div_a_grad(grid_, a_edge_, x, -1.0, y);
    }

    // Solves (mass*I - div a grad) x = b to rel_tol. For mass == 0 the system
    // is solved on mean-zero fields (b must have zero mean up to rounding).
    // Returns the achieved relative residual.
    double solve(double mass, const std::vector<double>& b, std::vector<double>& x,
                 const SolverConfig& cfg) {
        const std::size_t count = grid_.sites();
        const bool singular = (mass == 0.0);
        std::vector<double> r = b, z, p, ap(count);
        if (x.size() != count) x.assign(count, 0.0);

        const double bnorm = norm2(b);
        if (bnorm == 0.0) {
            x.assign(count, 0.0);
            return 0.0;
        }
        // r = b - A x for warm starts
        apply(mass, x, ap);
        for (std::size_t i = 0; i < count; ++i) r[i] = b[i] - ap[i];
        if (singular) remove_mean(r);

        z = precondition(mass, r, cfg);
        p = z;
        double rz = dot(r, z);
        const int max_iter = cfg.effective_max_iter(grid_);
        double relres = norm2(r) / bnorm;
        int it = 0;
        while (relres > cfg.rel_tol && it < max_iter) {
            apply(mass, p, ap);
            const double alpha = rz / dot(p, ap);
            for (std::size_t i = 0; i < count; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if (singular && (it % 32) == 31) remove_mean(r);
            z = precondition(mass, r, cfg);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < count; ++i) p[i] = z[i] + beta * p[i];
            relres = norm2(r) / bnorm;
            ++it;
        }
        if (relres > cfg.rel_tol) throw NoConvergence(it, relres);
        if (singular) remove_mean(x);
        iterations_ = it;
        return relres;
    }

    int last_iterations() const { return iterations_; }

private:
    std::vector<double> precondition(double mass, const std::vector<double>& r,
                                     const SolverConfig& cfg) {
        if (!cfg.precondition) return r;
        auto spec = fft_.forward(r);
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const double denom = mass + abar_ * lap_[i];
            spec[i] = (denom > 0.0) ? spec[i] / denom : 0.0;
        }
        return fft_.inverse(spec);
    }

    static void remove_mean(std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double& x : v) x -= m;
    }

    PeriodicGrid grid_;
    Fft fft_;
    VectorField a_edge_;
    std::vector<double> lap_;
    double abar_ = 1.0;
    int iterations_ = 0;
};

struct CorrectorSolution {
    int direction = 0;               // unit lattice vector e_i
    double mass_T = 0.0;             // T > 0, or infinity for the steady corrector
    ScalarField phi;
    VectorField grad_phi;
    VectorField flux;                // q = a_edge (grad phi + e)
    double residual = 0.0;
    int iterations = 0;

    bool steady() const { return !std::isfinite(mass_T); }
};

inline ScalarField corrector_rhs(const VectorField& a_edge, int direction) {
    VectorField ae(a_edge.grid);
    ae[direction] = a_edge[direction];
    return divergence(ae);
}

inline VectorField assemble_flux(const VectorField& a_edge, const VectorField& grad_phi,
                                 int direction) {
    VectorField q(a_edge.grid);
    for (int ax = 0; ax < a_edge.grid.d; ++ax) {
        const double e_comp = (ax == direction) ? 1.0 : 0.0;
        for (std::size_t i = 0; i < q[ax].size(); ++i)
            q[ax][i] = a_edge[ax][i] * (grad_phi[ax][i] + e_comp);
    }
    return q;
}

inline CorrectorSolution solve_massive_corrector(EllipticSolver& solver, int direction, double T,
                                                 const SolverConfig& cfg = {}) {
    if (!(T > 0.0)) throw std::invalid_argument("massive corrector needs T > 0");
    CorrectorSolution sol;
    sol.direction = direction;
    sol.mass_T = T;
    const ScalarField b = corrector_rhs(solver.edge_coeff(), direction);
    sol.phi = ScalarField(b.grid);
    sol.residual = solver.solve(1.0 / T, b.values, sol.phi.values, cfg);
    sol.iterations = solver.last_iterations();
    sol.grad_phi = gradient(sol.phi);
    sol.flux = assemble_flux(solver.edge_coeff(), sol.grad_phi, direction);
    return sol;
}

inline CorrectorSolution solve_steady_corrector(EllipticSolver& solver, int direction,
                                                const SolverConfig& cfg = {}) {
    CorrectorSolution sol;
    sol.direction = direction;
    sol.mass_T = std::numeric_limits<double>::infinity();
    const ScalarField b = corrector_rhs(solver.edge_coeff(), direction);
    sol.phi = ScalarField(b.grid);
    sol.residual = solver.solve(0.0, b.values, sol.phi.values, cfg);
    sol.iterations = solver.last_iterations();
    sol.grad_phi = gradient(sol.phi);
    sol.flux = assemble_flux(solver.edge_coeff(), sol.grad_phi, direction);
    return sol;
}

// Skew potential sigma_{jk} for one flux q = q_{e_i}: exact spectral inversion
// of (1/T - Laplacian) sigma_{jk} = d_j q_k - d_k q_j (forward differences);
// the steady case inverts on mean-zero modes. Stored as the pairs (j,k), j<k.
struct FluxCorrector {
    int direction = 0;
    double mass_T = 0.0;  // infinity for steady
    std::vector<std::pair<int, int>> pairs;
    std::vector<ScalarField> sigma;  // one per pair, antisymmetric in (j,k)

    double sigma_at(int j, int k, std::size_t site) const {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            if (pairs[p].first == j && pairs[p].second == k) return sigma[p][site];
            if (pairs[p].first == k && pairs[p].second == j) return -sigma[p][site];
        }
        return 0.0;
    }
};

inline FluxCorrector solve_flux_corrector(const VectorField& q, int direction, double T, Fft& fft) {
    const PeriodicGrid& g = q.grid;
    FluxCorrector out;
    out.direction = direction;
    out.mass_T = T;
    const bool steady = !std::isfinite(T);
    const double mass = steady ? 0.0 : 1.0 / T;
    std::vector<std::vector<std::complex<double>>> qs(static_cast<std::size_t>(g.d));
    for (int ax = 0; ax < g.d; ++ax) qs[static_cast<std::size_t>(ax)] = fft.forward(q[ax]);
    for (int j = 0; j < g.d; ++j) {
        for (int k = j + 1; k < g.d; ++k) {
            std::vector<std::complex<double>> s(g.sites());
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto kv = g.coords(i);
                const double lam = laplace_symbol(g, kv);
                const double denom = mass + lam;
                if (denom <= 0.0) {
                    s[i] = 0.0;  // zero mode, gauge
                    continue;
                }
                const auto dj = grad_symbol(kv[static_cast<std::size_t>(j)], g.n);
                const auto dk = grad_symbol(kv[static_cast<std::size_t>(k)], g.n);
                s[i] = (dj * qs[static_cast<std::size_t>(k)][i] - dk * qs[static_cast<std::size_t>(j)][i]) / denom;
            }
            ScalarField f(g);
            f.values = fft.inverse(s);
            out.pairs.emplace_back(j, k);
            out.sigma.push_back(std::move(f));
        }
    }
    return out;
}

// j-th component of the row divergence (div sigma)_j = sum_k backward-diff_k sigma_{jk}.
inline VectorField flux_corrector_divergence(const FluxCorrector& fc, const PeriodicGrid& g) {
    VectorField div(g);
    for (int j = 0; j < g.d; ++j) {
        for (int k = 0; k < g.d; ++k) {
            if (k == j) continue;
            for (std::size_t i = 0; i < g.sites(); ++i) {
                const double here = fc.sigma_at(j, k, i);
                const double down = fc.sigma_at(j, k, g.shift_down(i, k));
                div[j][i] += here - down;
            }
        }
    }
    return div;
}

struct HomogenizedEstimate {
    int d = 2;
    std::array<std::array<double, 3>, 3> matrix{};  // d x d
    std::string provenance;
    int box_side = 0;

    double entry(int i, int j) const { return matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
};

// a_hom column i = cell average of q_{e_i}.
inline HomogenizedEstimate rve_homogenized_matrix(const std::vector<CorrectorSolution>& sols,
                                                  const PeriodicGrid& g) {
    HomogenizedEstimate est;
    est.d = g.d;
    est.box_side = g.n;
    est.provenance = "rve-steady";
    for (const auto& sol : sols) {
        const auto qbar = sol.flux.mean();
        for (int j = 0; j < g.d; ++j)
            est.matrix[static_cast<std::size_t>(j)][static_cast<std::size_t>(sol.direction)] =
                qbar[static_cast<std::size_t>(j)];
    }
    return est;
}

}  // namespace homog

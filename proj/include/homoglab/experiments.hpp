#pragma once

// Ensemble experiment drivers shared by the CLI and the acceptance suite.
// Every driver maps (master_seed, sample_index) -> row deterministically, so
// results are byte-identical for any worker count: workers claim sample
// indices from an atomic counter but write into preallocated slots.

#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "homoglab/extrapolation.hpp"
#include "homoglab/gaussian_field.hpp"
#include "homoglab/kernels.hpp"
#include "homoglab/semigroup.hpp"
#include "homoglab/smallcontrast.hpp"
#include "homoglab/solver.hpp"
#include "homoglab/stats.hpp"
#include "homoglab/two_scale.hpp"

namespace homog {

struct EnsembleSpec {
    int d = 2;
    int n = 64;
    double beta = 4.0;
    CoefficientMapSpec map;
    std::uint64_t master_seed = 1;
    int n_samples = 8;
    int threads = 1;

    PeriodicGrid grid() const { return PeriodicGrid(d, n); }
};

struct Table {
    std::string schema;                     // "<name>@<version>"
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;  // one row per sample (or probe)

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::invalid_argument("no column named " + name);
    }
};

// Deterministic parallel loop: worker threads claim indices, results are
// written into per-index slots by the caller's function.
template <typename F>
inline void for_each_sample(int n_samples, int threads, F&& fn) {
    const int workers = std::max(1, std::min(threads, n_samples));
    if (workers == 1) {
        for (int s = 0; s < n_samples; ++s) fn(s);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const int s = next.fetch_add(1);
                if (s >= n_samples) return;
                try {
                    fn(s);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline CoefficientField sample_coefficient(const PeriodicGrid& g,
                                           const std::vector<double>& density,
                                           const CoefficientMapSpec& map, const SampleSeed& seed,
                                           Fft& fft) {
    return apply_coefficient_map(sample_gaussian(density, g, seed, fft), map);
}

// Single-point convolution (f * k)(0) = sum_x f(x) k(x) for symmetric k.
inline double probe_at_origin(const std::vector<double>& f, const std::vector<double>& kernel) {
    return dot(f, kernel);
}

// ---- field-check -----------------------------------------------------------

inline Table run_field_check(const EnsembleSpec& spec) {
    const PeriodicGrid g = spec.grid();
    Table t;
    t.schema = "field-check@1";
    t.columns = {"sample_index", "g_origin", "a_mean", "a_min", "a_max"};
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto field =
            sample_gaussian(density, g, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        const auto a = apply_coefficient_map(field, spec.map);
        double mean = 0.0;
        for (double v : a.a) mean += v;
        mean /= static_cast<double>(a.a.size());
        t.rows[static_cast<std::size_t>(s)] = {static_cast<double>(s), field.values[0], mean,
                                               a.lower, a.upper};
    });
    return t;
}

// ---- birkhoff ball averages ------------------------------------------------

inline std::vector<std::vector<std::size_t>> ball_masks(const PeriodicGrid& g,
                                                        const std::vector<double>& radii) {
    std::vector<std::vector<std::size_t>> masks(radii.size());
    for (std::size_t i = 0; i < g.sites(); ++i) {
        const double r2 = min_image_abs2(g, i);
        for (std::size_t k = 0; k < radii.size(); ++k)
            if (r2 <= radii[k] * radii[k] + 1e-12) masks[k].push_back(i);
    }
    return masks;
}

inline Table run_birkhoff(const EnsembleSpec& spec, const std::vector<double>& radii) {
    const PeriodicGrid g = spec.grid();
    for (double r : radii)
        if (r > static_cast<double>(g.n) / 8.0) throw ScaleTooLarge(r, g.n);
    Table t;
    t.schema = "birkhoff@1";
    t.columns = {"sample_index"};
    for (double r : radii) t.columns.push_back("ball_avg_r" + std::to_string(static_cast<int>(r)));
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    const auto masks = ball_masks(g, radii);
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        std::vector<double> row{static_cast<double>(s)};
        for (const auto& mask : masks) {
            double acc = 0.0;
            for (std::size_t i : mask) acc += a.a[i];
            row.push_back(acc / static_cast<double>(mask.size()));
        }
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- corrector (steady RVE + smoothed-gradient probes) ---------------------

inline Table run_corrector(const EnsembleSpec& spec, const std::vector<double>& r_ladder) {
    const PeriodicGrid g = spec.grid();
    for (double r : r_ladder)
        if (r > static_cast<double>(g.n) / 8.0) throw ScaleTooLarge(r, g.n);
    Table t;
    t.schema = "corrector@1";
    t.columns = {"sample_index", "residual", "iterations", "a00", "a01", "a10", "a11",
                 "grad_phi_l2"};
    for (double r : r_ladder)
        t.columns.push_back("grad_phi_r" + std::to_string(static_cast<int>(r)));
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    std::vector<ScalarField> kernels;
    for (double r : r_ladder) kernels.push_back(make_kernel({KernelKind::Gaussian, r}, g));
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        EllipticSolver solver(g, a);
        std::vector<CorrectorSolution> sols;
        for (int dir = 0; dir < g.d; ++dir) sols.push_back(solve_steady_corrector(solver, dir));
        const auto est = rve_homogenized_matrix(sols, g);
        const auto& sol = sols[0];
        std::vector<double> row{static_cast<double>(s),
                                sol.residual,
                                static_cast<double>(sol.iterations),
                                est.entry(0, 0),
                                est.entry(0, 1),
                                est.entry(1, 0),
                                est.entry(1, 1),
                                std::sqrt(field_inner(sol.grad_phi, sol.grad_phi) /
                                          static_cast<double>(g.sites()))};
        for (const auto& k : kernels)
            row.push_back(probe_at_origin(sol.grad_phi[0], k.values));
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- semigroup decay -------------------------------------------------------

inline Table run_semigroup_decay(const EnsembleSpec& spec, const std::vector<double>& T_probes) {
    const PeriodicGrid g = spec.grid();
    Table t;
    t.schema = "semigroup-decay@1";
    t.columns = {"sample_index"};
    for (double T : T_probes) {
        t.columns.push_back("mean_u2_T" + std::to_string(static_cast<int>(T)));
        t.columns.push_back("mean_grad_u2_T" + std::to_string(static_cast<int>(T)));
    }
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    TimeGrid tg;
    tg.t_final = T_probes.back();
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        EllipticSolver solver(g, a);
        SemigroupRunOptions opt;
        opt.probes = T_probes;
        const auto res = run_semigroup(solver, 0, tg, opt);
        std::vector<double> row{static_cast<double>(s)};
        for (std::size_t p = 0; p < T_probes.size(); ++p) {
            row.push_back(res.decay.mean_u2[p]);
            row.push_back(res.decay.mean_grad_u2[p]);
        }
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- flux fluctuation probes -----------------------------------------------

struct FluxProbeSpec {
    double t_final = 1024.0;
    std::vector<double> r_fixed_T;   // (q)_r(t_final) probes
    std::vector<double> r_diagonal;  // (q)_r(r^2) probes
    std::vector<double> r_weighted;  // q(r^2) * f_r probes
};

inline Table run_flux_fluctuations(const EnsembleSpec& spec, const FluxProbeSpec& probes) {
    const PeriodicGrid g = spec.grid();
    for (double r : probes.r_fixed_T)
        if (!(r >= 1.0) || r > std::sqrt(probes.t_final) + 1e-9) throw ScaleTooLarge(r, g.n);
    if (std::sqrt(probes.t_final) > static_cast<double>(g.n) / 8.0)
        throw ScaleTooLarge(std::sqrt(probes.t_final), g.n);
    for (double r : probes.r_weighted)
        if (r > static_cast<double>(g.n) / 16.0) throw ScaleTooLarge(r, g.n / 2);

    Table t;
    t.schema = "flux-fluctuations@1";
    t.columns = {"sample_index"};
    for (double r : probes.r_fixed_T)
        t.columns.push_back("q_r" + std::to_string(static_cast<int>(r)) + "_T");
    for (double r : probes.r_diagonal)
        t.columns.push_back("q_diag_r" + std::to_string(static_cast<int>(r)));
    for (double r : probes.r_weighted)
        t.columns.push_back("q_h_r" + std::to_string(static_cast<int>(r)));
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});

    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    // precompute kernels once; f_r construction is expensive
    std::vector<ScalarField> gauss_kernels;
    for (double r : probes.r_fixed_T)
        gauss_kernels.push_back(make_kernel({KernelKind::Gaussian, r}, g));
    std::vector<ScalarField> diag_kernels;
    for (double r : probes.r_diagonal)
        diag_kernels.push_back(make_kernel({KernelKind::Gaussian, r}, g));
    std::vector<VectorField> fr_kernels;
    for (double r : probes.r_weighted) fr_kernels.push_back(make_fr_kernel(r, g));

    // probe times: each diagonal/weighted r needs a snapshot at t = r^2
    std::vector<double> snap_times;
    for (double r : probes.r_diagonal) snap_times.push_back(r * r);
    for (double r : probes.r_weighted) snap_times.push_back(r * r);
    snap_times.push_back(probes.t_final);
    std::sort(snap_times.begin(), snap_times.end());
    snap_times.erase(std::unique(snap_times.begin(), snap_times.end()), snap_times.end());

    TimeGrid tg;
    tg.t_final = probes.t_final;
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        EllipticSolver solver(g, a);
        SemigroupRunOptions opt;
        opt.probes = snap_times;
        const auto res = run_semigroup(solver, 0, tg, opt);
        auto snapshot_at = [&](double time) -> const VectorField& {
            for (std::size_t p = 0; p < res.probe_times.size(); ++p)
                if (std::abs(res.probe_times[p] - time) < 1e-9) return res.q_snapshots[p];
            throw std::logic_error("missing snapshot");
        };
        std::vector<double> row{static_cast<double>(s)};
        const VectorField& q_final = snapshot_at(probes.t_final);
        for (const auto& k : gauss_kernels)
            row.push_back(probe_at_origin(q_final[0], k.values));
        for (std::size_t i = 0; i < probes.r_diagonal.size(); ++i) {
            const VectorField& q = snapshot_at(probes.r_diagonal[i] * probes.r_diagonal[i]);
            row.push_back(probe_at_origin(q[0], diag_kernels[i].values));
        }
        for (std::size_t i = 0; i < probes.r_weighted.size(); ++i) {
            const VectorField& q = snapshot_at(probes.r_weighted[i] * probes.r_weighted[i]);
            double acc = 0.0;
            for (int ax = 0; ax < g.d; ++ax) acc += probe_at_origin(q[ax], fr_kernels[i][ax]);
            row.push_back(acc);
        }
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- corrector growth ------------------------------------------------------

inline Table run_growth(const EnsembleSpec& spec, const std::vector<double>& offsets) {
    const PeriodicGrid g = spec.grid();
    for (double x : offsets)
        if (x > static_cast<double>(g.n) / 8.0) throw ScaleTooLarge(x, g.n);
    Table t;
    t.schema = "growth@1";
    t.columns = {"sample_index"};
    for (double x : offsets)
        t.columns.push_back("growth_x" + std::to_string(static_cast<int>(x)));
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    const KernelSpec unit_gauss{KernelKind::Gaussian, 1.0};
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        EllipticSolver solver(g, a);
        const auto sol = solve_steady_corrector(solver, 0);
        const auto fc =
            solve_flux_corrector(sol.flux, 0, std::numeric_limits<double>::infinity(), fft);
        // components of the (phi, sigma) vector
        std::vector<const ScalarField*> comps{&sol.phi};
        for (const auto& sg : fc.sigma) comps.push_back(&sg);
        // base value: scale-1 smoothing read at the origin
        std::vector<double> base;
        std::vector<ScalarField> smoothed;
        for (const auto* c : comps) {
            smoothed.push_back(convolve(*c, unit_gauss, fft));
            base.push_back(smoothed.back().values[0]);
        }
        // |(phi,sigma) - base|^2, smoothed at scale 1
        ScalarField w(g);
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (std::size_t i = 0; i < g.sites(); ++i) {
                const double dv = comps[c]->values[i] - base[c];
                w.values[i] += dv * dv;
            }
        const ScalarField w1 = convolve(w, unit_gauss, fft);
        std::vector<double> row{static_cast<double>(s)};
        for (double x : offsets) {
            const std::size_t idx = g.index({static_cast<int>(x), 0, 0});
            row.push_back(std::sqrt(std::max(0.0, w1.values[idx])));
        }
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- Richardson extrapolation sub-systematic errors ------------------------

inline Table run_extrapolate(const EnsembleSpec& spec, double T0, int K) {
    const PeriodicGrid g = spec.grid();
    Table t;
    t.schema = "extrapolate@1";
    t.columns = {"sample_index"};
    for (int k = 0; k <= K; ++k)
        t.columns.push_back("err1_T" + std::to_string(static_cast<int>(T0 * std::pow(2.0, k))));
    for (int k = 0; k < K; ++k)
        t.columns.push_back("err2_T" + std::to_string(static_cast<int>(T0 * std::pow(2.0, k))));
    for (int k = 0; k < K; ++k)
        t.columns.push_back("abar2_err_T" + std::to_string(static_cast<int>(T0 * std::pow(2.0, k))));
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        EllipticSolver solver(g, a);
        std::vector<CorrectorSolution> steady;
        std::vector<ExtrapolationLadder> ladders;
        for (int dir = 0; dir < g.d; ++dir) {
            steady.push_back(solve_steady_corrector(solver, dir));
            ladders.push_back(build_ladder(solver, dir, T0, K, 2));
        }
        const auto ref = rve_homogenized_matrix(steady, g);
        auto grad_err = [&](const VectorField& grad) {
            VectorField diff(g);
            for (int ax = 0; ax < g.d; ++ax)
                for (std::size_t i = 0; i < g.sites(); ++i)
                    diff[ax][i] = grad[ax][i] - steady[0].grad_phi[ax][i];
            return std::sqrt(field_inner(diff, diff) / static_cast<double>(g.sites()));
        };
        std::vector<double> row{static_cast<double>(s)};
        for (int k = 0; k <= K; ++k) row.push_back(grad_err(ladders[0].extrapolant(1, k)));
        for (int k = 0; k < K; ++k) row.push_back(grad_err(ladders[0].extrapolant(2, k)));
        for (int k = 0; k < K; ++k) {
            const auto est = a_hom_extrapolated(solver.edge_coeff(), ladders, 2, k);
            double frob = 0.0;
            for (int i = 0; i < g.d; ++i)
                for (int j = 0; j < g.d; ++j)
                    frob += std::pow(est.entry(i, j) - ref.entry(i, j), 2);
            row.push_back(std::sqrt(frob));
        }
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- two-scale expansion ---------------------------------------------------

inline Table run_two_scale_ensemble(const EnsembleSpec& spec, const std::vector<double>& eps_list) {
    const PeriodicGrid g = spec.grid();
    Table t;
    t.schema = "two-scale@1";
    t.columns = {"sample_index"};
    for (double eps : eps_list)
        t.columns.push_back("grad_error_eps_inv" + std::to_string(static_cast<int>(1.0 / eps)));
    t.rows.assign(static_cast<std::size_t>(spec.n_samples), {});
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    for_each_sample(spec.n_samples, spec.threads, [&](int s) {
        Fft fft(g);
        const auto a = sample_coefficient(
            g, density, spec.map, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        EllipticSolver solver(g, a);
        std::vector<CorrectorSolution> correctors;
        for (int dir = 0; dir < g.d; ++dir) correctors.push_back(solve_steady_corrector(solver, dir));
        const auto abar = rve_homogenized_matrix(correctors, g);
        std::vector<double> row{static_cast<double>(s)};
        for (double eps : eps_list)
            row.push_back(run_two_scale(solver, correctors, abar, eps).grad_error);
        t.rows[static_cast<std::size_t>(s)] = std::move(row);
    });
    return t;
}

// ---- small-contrast oracle comparison --------------------------------------

inline Table run_oracle(const EnsembleSpec& spec, const std::vector<double>& deltas,
                        const std::vector<double>& times, double theta = 0.02) {
    const PeriodicGrid g = spec.grid();
    Table t;
    t.schema = "oracle@1";
    t.columns = {"sample_index", "delta", "T", "rel_error", "remainder"};
    Fft fft0(g);
    const auto density = spectral_density({spec.beta, 1}, g, fft0);
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < spec.n_samples; ++s) {
        Fft fft(g);
        const auto field = sample_gaussian(
            density, g, SampleSeed{spec.master_seed, static_cast<std::uint64_t>(s)}, fft);
        const auto atilde = contrast_perturbation(field);
        TimeGrid tg;
        tg.theta = theta;
        tg.dt_min = theta / 10.0;
        for (double delta : deltas)
            for (double T : times) {
                const auto rep = oracle_compare(atilde, 0, T, delta, tg);
                rows.push_back({static_cast<double>(s), delta, T, rep.rel_error, rep.remainder});
            }
    }
    t.rows = std::move(rows);
    return t;
}

}  // namespace homog

#pragma once

// Ensemble statistics: centered moments with bootstrap standard errors,
// weighted log-log fits with bootstrap confidence intervals, and the predicted
// rate-law tables mu_beta, eta_beta, pi_star, xi_{d,beta}, chi_{d,beta}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "homoglab/random.hpp"

namespace homog {

struct TooFewSamples : std::runtime_error {
    explicit TooFewSamples(std::size_t n)
        : std::runtime_error("need at least 8 samples, got " + std::to_string(n)) {}
};

struct MomentEstimate {
    double p = 2.0;
    double value = 0.0;   // <|X - Xbar|^p>^{1/p}
    double stderr_ = 0.0; // bootstrap standard error (200 resamples)
};

inline double centered_moment(const std::vector<double>& x, double p) {
    // exact zero for a degenerate column (summation rounding would otherwise
    // leave an O(eps) residue)
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) return 0.0;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double acc = 0.0;
    for (double v : x) acc += std::pow(std::abs(v - mean), p);
    return std::pow(acc / static_cast<double>(x.size()), 1.0 / p);
}

inline MomentEstimate fluctuation_moment(const std::vector<double>& x, double p = 2.0,
                                         std::uint64_t bootstrap_seed = 0x9d2c5680ULL) {
    if (x.size() < 8) throw TooFewSamples(x.size());
    MomentEstimate est;
    est.p = p;
    est.value = centered_moment(x, p);
    const int reps = 200;
    NormalStream rng(bootstrap_seed);
    std::vector<double> resampled(x.size());
    double s1 = 0.0, s2 = 0.0;
    for (int b = 0; b < reps; ++b) {
        for (std::size_t i = 0; i < x.size(); ++i)
            resampled[i] = x[rng.raw() % x.size()];
        const double m = centered_moment(resampled, p);
        s1 += m;
        s2 += m * m;
    }
    s1 /= reps;
    s2 /= reps;
    est.stderr_ = std::sqrt(std::max(0.0, s2 - s1 * s1));
    return est;
}

enum class LogCorrection { None, Log, SqrtLog };

inline double correction_divisor(LogCorrection c, double x) {
    switch (c) {
        case LogCorrection::None: return 1.0;
        case LogCorrection::Log: return std::log(x);
        case LogCorrection::SqrtLog: return std::sqrt(std::log(x));
    }
    return 1.0;
}

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double ci_lo = 0.0;   // bootstrap 95% CI on the slope
    double ci_hi = 0.0;
    std::vector<double> abscissae;
    LogCorrection correction = LogCorrection::None;
};

struct NonPositiveValue : std::invalid_argument {
    NonPositiveValue() : std::invalid_argument("log-log fit needs positive values") {}
};

// Weighted least squares in log-log coordinates after dividing out the
// requested log correction. Weights are 1/stderr^2 when stderrs are given.
inline ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& yerr = {},
                             LogCorrection corr = LogCorrection::None) {
    if (x.size() < 3) throw std::invalid_argument("log-log fit needs >= 3 points");
    std::vector<double> lx(x.size()), ly(x.size()), w(x.size(), 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double yc = y[i] / correction_divisor(corr, x[i]);
        if (!(yc > 0.0) || !(x[i] > 0.0)) throw NonPositiveValue();
        lx[i] = std::log(x[i]);
        ly[i] = std::log(yc);
        if (!yerr.empty() && yerr[i] > 0.0 && y[i] > 0.0) {
            const double rel = yerr[i] / y[i];  // d(log y) = dy / y
            w[i] = 1.0 / (rel * rel + 1e-12);
        }
    }
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sw += w[i];
        swx += w[i] * lx[i];
        swy += w[i] * ly[i];
        swxx += w[i] * lx[i] * lx[i];
        swxy += w[i] * lx[i] * ly[i];
    }
    ScalingFit fit;
    fit.correction = corr;
    fit.abscissae = x;
    const double denom = sw * swxx - swx * swx;
    fit.slope = (sw * swxy - swx * swy) / denom;
    fit.intercept = (swy - fit.slope * swx) / sw;
    double ss_res = 0, ss_tot = 0;
    const double ybar = swy / sw;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double pred = fit.intercept + fit.slope * lx[i];
        ss_res += w[i] * (ly[i] - pred) * (ly[i] - pred);
        ss_tot += w[i] * (ly[i] - ybar) * (ly[i] - ybar);
    }
    fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    fit.ci_lo = fit.slope;
    fit.ci_hi = fit.slope;
    return fit;
}

// Fit with a bootstrap CI over per-abscissa sample tables: for each replicate
// the same resampled sample indices are used at every abscissa (common random
// numbers), the per-abscissa statistic is recomputed, and the slope refitted.
inline ScalingFit loglog_fit_bootstrap(const std::vector<double>& x,
                                       const std::vector<std::vector<double>>& samples,
                                       const std::function<double(const std::vector<double>&)>& stat,
                                       LogCorrection corr = LogCorrection::None,
                                       std::uint64_t seed = 0x243f6a88ULL) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = stat(samples[i]);
    ScalingFit fit = loglog_fit(x, y, {}, corr);

    const std::size_t nsamp = samples.front().size();
    const int reps = 200;
    NormalStream rng(seed);
    std::vector<double> slopes;
    std::vector<std::size_t> idx(nsamp);
    std::vector<double> resampled(nsamp), yb(x.size());
    for (int b = 0; b < reps; ++b) {
        for (std::size_t i = 0; i < nsamp; ++i) idx[i] = rng.raw() % nsamp;
        bool ok = true;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t s = 0; s < nsamp; ++s) resampled[s] = samples[i][idx[s]];
            yb[i] = stat(resampled);
            if (!(yb[i] > 0.0)) ok = false;
        }
        if (!ok) continue;
        slopes.push_back(loglog_fit(x, yb, {}, corr).slope);
    }
    if (slopes.size() >= 20) {
        std::sort(slopes.begin(), slopes.end());
        fit.ci_lo = slopes[static_cast<std::size_t>(0.025 * slopes.size())];
        fit.ci_hi = slopes[static_cast<std::size_t>(0.975 * slopes.size()) - 1];
        fit.ci_lo = std::min(fit.ci_lo, fit.slope);
        fit.ci_hi = std::max(fit.ci_hi, fit.slope);
    }
    return fit;
}

// ---- rate-law tables -------------------------------------------------------

struct UnknownBranch : std::invalid_argument {
    explicit UnknownBranch(const std::string& what) : std::invalid_argument(what) {}
};

// mu_beta(T): T^{(d-beta)/4} for beta < d, log^{1/2} T at beta = d, 1 above.
inline double rate_mu_beta(int d, double beta, double T) {
    if (!(T >= 1.0)) throw std::invalid_argument("rate argument must be >= 1");
    if (beta < d) return std::pow(T, (d - beta) / 4.0);
    if (beta == d) return std::sqrt(std::log(T));
    return 1.0;
}

// eta_beta(T): T^{-1/2 - beta/4} below d, log^{1/2}(T) T^{-1/2-d/4} at d,
// T^{-1/2 - d/4} above.
inline double rate_eta_beta(int d, double beta, double T) {
    if (!(T >= 1.0)) throw std::invalid_argument("rate argument must be >= 1");
    if (beta < d) return std::pow(T, -0.5 - beta / 4.0);
    if (beta == d) return std::sqrt(std::log(T)) * std::pow(T, -0.5 - d / 4.0);
    return std::pow(T, -0.5 - d / 4.0);
}

// pi_star(r): r^beta below d, r^d / log r at d, r^d above.
inline double rate_pi_star(int d, double beta, double r) {
    if (!(r >= 1.0)) throw std::invalid_argument("rate argument must be >= 1");
    if (beta < d) return std::pow(r, beta);
    if (beta == d) return std::pow(r, d) / std::log(r);
    return std::pow(r, d);
}

// xi_{d,beta}(|x|): corrector growth.
inline double rate_xi_dbeta(int d, double beta, double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("rate argument must be >= 0");
    if (beta < 2.0) return std::pow(x + 1.0, 1.0 - beta / 2.0);
    if (beta == 2.0 && d == 2) return std::log(x + 2.0);  // beta = d = 2
    if (beta == 2.0 || d == 2) return std::sqrt(std::log(x + 2.0));
    return 1.0;  // beta > 2, d > 2
}

// chi_{d,beta}(r): H-weighted flux fluctuations.
inline double rate_chi_dbeta(int d, double beta, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("rate argument must be >= 0");
    if (beta < 2.0 && d > 2) return std::pow(r + 1.0, 1.0 - beta / 2.0);
    if (beta <= 2.0 && d == 2) return std::pow(r + 1.0, 1.0 - beta / 2.0) * std::log(r + 2.0);
    if ((beta == 2.0 && d > 2) || (beta > 2.0 && d == 2)) return std::sqrt(std::log(r + 2.0));
    if (beta > 2.0 && d > 2) return 1.0;
    throw UnknownBranch("chi_{d,beta}: unsupported (d, beta)");
}

inline double rate(const std::string& name, int d, double beta, double arg) {
    if (name == "mu_beta") return rate_mu_beta(d, beta, arg);
    if (name == "eta_beta") return rate_eta_beta(d, beta, arg);
    if (name == "pi_star") return rate_pi_star(d, beta, arg);
    if (name == "xi_dbeta") return rate_xi_dbeta(d, beta, arg);
    if (name == "chi_dbeta") return rate_chi_dbeta(d, beta, arg);
    throw UnknownBranch("unknown rate law: " + name);
}

}  // namespace homog

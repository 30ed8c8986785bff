#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homoglab/random.hpp"
#include "homoglab/stats.hpp"

using namespace homog;

TEST_CASE("fluctuation moment: guard, constant column, determinism") {
    CHECK_THROWS_AS(fluctuation_moment({1, 2, 3}, 2.0), TooFewSamples);

    std::vector<double> constant(32, 1.7);
    auto est = fluctuation_moment(constant);
    CHECK(est.value == 0.0);

    std::vector<double> x(64);
    NormalStream rng(5);
    for (double& v : x) v = rng.normal();
    auto a = fluctuation_moment(x, 2.0, 123);
    auto b = fluctuation_moment(x, 2.0, 123);
    CHECK(a.value == b.value);
    CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("Gaussian moment oracles: p=2 gives 1, p=4 gives 3^{1/4}") {
    const int n = 10000;
    std::vector<double> x(n);
    NormalStream rng(77);
    for (double& v : x) v = rng.normal();

    auto m2 = fluctuation_moment(x, 2.0);
    CHECK(std::abs(m2.value - 1.0) <= 3.0 * std::max(m2.stderr_, 1e-3));

    auto m4 = fluctuation_moment(x, 4.0);
    CHECK(std::abs(m4.value - std::pow(3.0, 0.25)) <= 3.0 * std::max(m4.stderr_, 1e-3));
}

TEST_CASE("log-log fit recovers exact power laws") {
    std::vector<double> x{2, 4, 8, 16, 32};
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::pow(x[i], -1.5);
    auto fit = loglog_fit(x, y);
    CHECK(std::abs(fit.slope + 1.5) <= 1e-10);
    CHECK(fit.r_squared >= 1.0 - 1e-12);

    // exact law with intercept
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 7.0 * std::pow(x[i], 0.25);
    fit = loglog_fit(x, y);
    CHECK(std::abs(fit.slope - 0.25) <= 1e-10);
    CHECK(std::abs(std::exp(fit.intercept) - 7.0) <= 1e-8);
}

TEST_CASE("log corrections are divided out before fitting") {
    std::vector<double> x{4, 8, 16, 32, 64};
    std::vector<double> y(x.size()), y2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::log(x[i]) / x[i];
        y2[i] = std::sqrt(std::log(x[i])) * std::pow(x[i], -0.5);
    }
    CHECK(std::abs(loglog_fit(x, y, {}, LogCorrection::Log).slope + 1.0) <= 1e-10);
    CHECK(std::abs(loglog_fit(x, y2, {}, LogCorrection::SqrtLog).slope + 0.5) <= 1e-10);
}

TEST_CASE("log-log fit input validation") {
    CHECK_THROWS_AS(loglog_fit({1, 2}, {1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(loglog_fit({1, 2, 4}, {1, -1, 2}), NonPositiveValue);
    CHECK_THROWS_AS(loglog_fit({1, 2, 4}, {1, 0, 2}), NonPositiveValue);
}

TEST_CASE("noisy synthetic power law: target inside the bootstrap CI") {
    std::vector<double> x{2, 4, 8, 16, 32};
    const double target = -1.0;
    const std::size_t nsamp = 64;
    NormalStream rng(11);
    std::vector<std::vector<double>> tables;
    for (double xi : x) {
        std::vector<double> col(nsamp);
        for (double& v : col) v = std::pow(xi, target) * (1.0 + 0.1 * rng.normal());
        tables.push_back(col);
    }
    auto stat = [](const std::vector<double>& col) {
        double s = 0.0;
        for (double v : col) s += v;
        return s / static_cast<double>(col.size());
    };
    auto fit = loglog_fit_bootstrap(x, tables, stat);
    CHECK(fit.ci_lo <= target);
    CHECK(fit.ci_hi >= target);
    CHECK(fit.ci_lo <= fit.slope);
    CHECK(fit.ci_hi >= fit.slope);
    CHECK(std::abs(fit.slope - target) <= 0.1);

    // bootstrap reproducibility
    auto fit2 = loglog_fit_bootstrap(x, tables, stat);
    CHECK(fit.ci_lo == fit2.ci_lo);
    CHECK(fit.ci_hi == fit2.ci_hi);
}

TEST_CASE("rate laws match the documented branch values exactly") {
    // spot values
    CHECK(rate("mu_beta", 2, 1.0, 16.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(rate("eta_beta", 2, 3.0, 16.0) == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(rate("pi_star", 2, 4.0, 4.0) == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(rate("xi_dbeta", 2, 1.0, 3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(rate("chi_dbeta", 3, 3.0, 5.0) == doctest::Approx(1.0).epsilon(1e-14));

    // branch structure
    CHECK(rate_mu_beta(2, 2.0, 16.0) == doctest::Approx(std::sqrt(std::log(16.0))).epsilon(1e-14));
    CHECK(rate_mu_beta(2, 5.0, 16.0) == 1.0);
    CHECK(rate_eta_beta(2, 1.0, 16.0) == doctest::Approx(std::pow(16.0, -0.75)).epsilon(1e-14));
    CHECK(rate_eta_beta(2, 2.0, 16.0) ==
          doctest::Approx(std::sqrt(std::log(16.0)) * std::pow(16.0, -1.0)).epsilon(1e-14));
    CHECK(rate_pi_star(2, 1.0, 8.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(rate_pi_star(2, 2.0, 8.0) == doctest::Approx(64.0 / std::log(8.0)).epsilon(1e-14));
    CHECK(rate_xi_dbeta(2, 2.0, 6.0) == doctest::Approx(std::log(8.0)).epsilon(1e-14));
    CHECK(rate_xi_dbeta(3, 2.0, 6.0) == doctest::Approx(std::sqrt(std::log(8.0))).epsilon(1e-14));
    CHECK(rate_xi_dbeta(3, 4.0, 6.0) == 1.0);
    CHECK(rate_chi_dbeta(2, 1.0, 6.0) ==
          doctest::Approx(std::pow(7.0, 0.5) * std::log(8.0)).epsilon(1e-14));
    CHECK(rate_chi_dbeta(3, 2.0, 6.0) == doctest::Approx(std::sqrt(std::log(8.0))).epsilon(1e-14));
    CHECK(rate_chi_dbeta(2, 4.0, 6.0) == doctest::Approx(std::sqrt(std::log(8.0))).epsilon(1e-14));

    // guards
    CHECK_THROWS_AS(rate("nope", 2, 1.0, 4.0), UnknownBranch);
    CHECK_THROWS_AS(rate_mu_beta(2, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(rate_pi_star(2, 1.0, 0.5), std::invalid_argument);
}

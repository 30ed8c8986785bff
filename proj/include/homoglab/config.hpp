#pragma once

// JSON experiment configuration: parsing with defaults, serialization that
// round-trips, and a dry-run validator that reports violations with field
// paths before any compute starts.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "homoglab/experiments.hpp"

namespace homog {

struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    // grid
    int d = 2;
    int n = 64;
    // covariance
    double beta = 4.0;
    // coefficient map
    CoefficientMapSpec map;
    // ensemble
    int n_samples = 8;
    std::uint64_t master_seed = 1;
    int threads = 1;
    // experiment
    std::string name = "corrector";
    std::vector<double> t_ladder;
    std::vector<double> r_ladder;
    std::vector<double> r_weighted;
    std::vector<double> eps_ladder;
    std::vector<double> offsets;
    std::vector<double> deltas;
    double t_final = 1024.0;
    double T0 = 4.0;
    int K = 4;
    // output
    std::string out_dir = "out";

    EnsembleSpec ensemble() const {
        EnsembleSpec spec;
        spec.d = d;
        spec.n = n;
        spec.beta = beta;
        spec.map = map;
        spec.master_seed = master_seed;
        spec.n_samples = n_samples;
        spec.threads = threads;
        return spec;
    }
};

inline const std::set<std::string>& experiment_names() {
    static const std::set<std::string> names{
        "field-check", "birkhoff",   "corrector", "semigroup", "fluctuations",
        "h-fluctuations", "growth",  "extrapolate", "two-scale", "oracle"};
    return names;
}

inline nlohmann::json serialize_config(const ExperimentConfig& c) {
    nlohmann::json j;
    j["grid"] = {{"d", c.d}, {"n", c.n}};
    j["covariance"] = {{"beta", c.beta}};
    nlohmann::json m;
    m["kind"] = (c.map.kind == CoefficientMapKind::Logistic) ? "logistic" : "lognormal-clamped";
    m["lambda"] = c.map.lambda;
    m["kappa"] = c.map.kappa;
    if (c.map.kind == CoefficientMapKind::LognormalClamped) {
        m["b"] = c.map.b;
        m["c"] = c.map.c;
        m["kappa_tilde"] = c.map.kappa_tilde;
        m["m"] = c.map.m;
    }
    j["coefficient_map"] = m;
    j["ensemble"] = {{"n_samples", c.n_samples}, {"master_seed", c.master_seed}};
    nlohmann::json e;
    e["name"] = c.name;
    if (!c.t_ladder.empty()) e["t_ladder"] = c.t_ladder;
    if (!c.r_ladder.empty()) e["r_ladder"] = c.r_ladder;
    if (!c.r_weighted.empty()) e["r_weighted"] = c.r_weighted;
    if (!c.eps_ladder.empty()) e["eps_ladder"] = c.eps_ladder;
    if (!c.offsets.empty()) e["offsets"] = c.offsets;
    if (!c.deltas.empty()) e["deltas"] = c.deltas;
    e["t_final"] = c.t_final;
    e["T0"] = c.T0;
    e["K"] = c.K;
    j["experiment"] = e;
    j["output"] = {{"directory", c.out_dir}};
    return j;
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("grid")) {
            c.d = j["grid"].value("d", c.d);
            c.n = j["grid"].value("n", c.n);
        }
        if (j.contains("covariance")) c.beta = j["covariance"].value("beta", c.beta);
        if (j.contains("coefficient_map")) {
            const auto& m = j["coefficient_map"];
            const std::string kind = m.value("kind", "logistic");
            if (kind == "logistic") c.map.kind = CoefficientMapKind::Logistic;
            else if (kind == "lognormal-clamped") c.map.kind = CoefficientMapKind::LognormalClamped;
            else throw ConfigInvalid("coefficient_map.kind: unknown kind '" + kind + "'");
            c.map.lambda = m.value("lambda", c.map.lambda);
            c.map.kappa = m.value("kappa", c.map.kappa);
            c.map.b = m.value("b", c.map.b);
            c.map.c = m.value("c", c.map.c);
            c.map.kappa_tilde = m.value("kappa_tilde", c.map.kappa_tilde);
            c.map.m = m.value("m", c.map.m);
        }
        if (j.contains("ensemble")) {
            c.n_samples = j["ensemble"].value("n_samples", c.n_samples);
            c.master_seed = j["ensemble"].value("master_seed", c.master_seed);
        }
        if (j.contains("experiment")) {
            const auto& e = j["experiment"];
            c.name = e.value("name", c.name);
            c.t_ladder = e.value("t_ladder", c.t_ladder);
            c.r_ladder = e.value("r_ladder", c.r_ladder);
            c.r_weighted = e.value("r_weighted", c.r_weighted);
            c.eps_ladder = e.value("eps_ladder", c.eps_ladder);
            c.offsets = e.value("offsets", c.offsets);
            c.deltas = e.value("deltas", c.deltas);
            c.t_final = e.value("t_final", c.t_final);
            c.T0 = e.value("T0", c.T0);
            c.K = e.value("K", c.K);
        }
        if (j.contains("output")) c.out_dir = j["output"].value("directory", c.out_dir);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigInvalid(std::string("config parse error: ") + ex.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigInvalid("cannot open config file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigInvalid(std::string("config JSON error: ") + ex.what());
    }
    return parse_config(j);
}

// Dry-run validation; returns the list of violations (empty = valid).
inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> out;
    if (c.d < 1 || c.d > 3) out.push_back("grid.d: dimension must be 1, 2 or 3");
    if (c.n < 4 || (c.n & (c.n - 1)) != 0)
        out.push_back("grid.n: side must be a power of two >= 4");
    if (!(c.beta > 0.0)) out.push_back("covariance.beta: beta must be positive");
    if (!(c.map.lambda > 0.0) || c.map.lambda > 1.0)
        out.push_back("coefficient_map.lambda: must lie in (0, 1]");
    if (c.n_samples < 1) out.push_back("ensemble.n_samples: must be >= 1");
    if (c.threads < 1) out.push_back("threads: must be >= 1");
    if (!experiment_names().count(c.name))
        out.push_back("experiment.name: unknown experiment '" + c.name + "'");

    const double guard8 = static_cast<double>(c.n) / 8.0;
    const double guard16 = static_cast<double>(c.n) / 16.0;
    for (double r : c.r_ladder)
        if (r > guard8)
            out.push_back("experiment.r_ladder: r = " + std::to_string(r) +
                          " exceeds the n/8 scale guard");
    for (double r : c.r_weighted)
        if (r > guard16)
            out.push_back("experiment.r_weighted: r = " + std::to_string(r) +
                          " exceeds the n/16 scale guard");
    for (double x : c.offsets)
        if (x > guard8)
            out.push_back("experiment.offsets: offset = " + std::to_string(x) +
                          " exceeds the n/8 scale guard");
    if (c.name == "semigroup")
        for (double T : c.t_ladder)
            if (std::sqrt(T) > guard8)
                out.push_back("experiment.t_ladder: sqrt(T) for T = " + std::to_string(T) +
                              " exceeds the n/8 scale guard");
    if (c.name == "fluctuations" || c.name == "h-fluctuations") {
        if (std::sqrt(c.t_final) > guard8)
            out.push_back("experiment.t_final: sqrt(t_final) exceeds the n/8 scale guard");
    }
    for (double eps : c.eps_ladder) {
        const double m = eps * static_cast<double>(c.n);
        if (!(eps > 0.0) || std::abs(m - std::lround(m)) > 1e-9 || m < 1.0)
            out.push_back("experiment.eps_ladder: epsilon = " + std::to_string(eps) +
                          " is not m/n for an integer wavenumber m >= 1");
    }
    for (double delta : c.deltas)
        if (delta < 0.0 || delta >= 1.0)
            out.push_back("experiment.deltas: delta = " + std::to_string(delta) +
                          " outside [0, 1)");
    return out;
}

}  // namespace homog

// homoglab command-line driver: validate or run one experiment described by a
// JSON config, with per-sample CSV output, a summary JSON, and a manifest of
// content hashes for byte-reproducible reruns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homoglab/config.hpp"
#include "homoglab/experiments.hpp"
#include "homoglab/io.hpp"

namespace {

using namespace homog;

// Dyadic ladder 2, 4, ..., capped at `cap`.
std::vector<double> dyadic_ladder(double start, double cap) {
    std::vector<double> out;
    for (double v = start; v <= cap + 1e-9; v *= 2.0) out.push_back(v);
    return out;
}

void apply_defaults(ExperimentConfig& c) {
    const double guard8 = static_cast<double>(c.n) / 8.0;
    const double guard16 = static_cast<double>(c.n) / 16.0;
    if (c.name == "birkhoff" && c.r_ladder.empty()) c.r_ladder = dyadic_ladder(2.0, guard8);
    if (c.name == "corrector" && c.r_ladder.empty()) c.r_ladder = dyadic_ladder(2.0, guard8);
    if (c.name == "semigroup" && c.t_ladder.empty())
        c.t_ladder = dyadic_ladder(4.0, guard8 * guard8);
    if (c.name == "fluctuations" && c.r_ladder.empty())
        c.r_ladder = dyadic_ladder(2.0, std::min(guard8, std::sqrt(c.t_final)));
    if (c.name == "h-fluctuations" && c.r_weighted.empty())
        c.r_weighted = dyadic_ladder(4.0, guard16);
    if (c.name == "growth" && c.offsets.empty()) c.offsets = dyadic_ladder(4.0, guard8);
    if (c.name == "two-scale" && c.eps_ladder.empty()) {
        for (double inv : {8.0, 16.0, 32.0})
            if (static_cast<double>(c.n) / inv >= 1.0) c.eps_ladder.push_back(1.0 / inv);
    }
    if (c.name == "oracle") {
        if (c.deltas.empty()) c.deltas = {0.05, 0.1};
        if (c.t_ladder.empty()) c.t_ladder = {4.0, 16.0};
    }
}

Table dispatch(const ExperimentConfig& c) {
    const EnsembleSpec spec = c.ensemble();
    if (c.name == "field-check") return run_field_check(spec);
    if (c.name == "birkhoff") return run_birkhoff(spec, c.r_ladder);
    if (c.name == "corrector") return run_corrector(spec, c.r_ladder);
    if (c.name == "semigroup") return run_semigroup_decay(spec, c.t_ladder);
    if (c.name == "fluctuations") {
        FluxProbeSpec probes;
        probes.t_final = c.t_final;
        probes.r_fixed_T = c.r_ladder;
        probes.r_diagonal = c.r_ladder;
        return run_flux_fluctuations(spec, probes);
    }
    if (c.name == "h-fluctuations") {
        FluxProbeSpec probes;
        probes.t_final = c.t_final;
        probes.r_weighted = c.r_weighted;
        return run_flux_fluctuations(spec, probes);
    }
    if (c.name == "growth") return run_growth(spec, c.offsets);
    if (c.name == "extrapolate") return run_extrapolate(spec, c.T0, c.K);
    if (c.name == "two-scale") return run_two_scale_ensemble(spec, c.eps_ladder);
    if (c.name == "oracle") return run_oracle(spec, c.deltas, c.t_ladder);
    throw ConfigInvalid("experiment.name: unknown experiment '" + c.name + "'");
}

void write_table_csv(const std::string& path, const Table& t) {
    CsvWriter w(path, t.schema, t.columns);
    for (const auto& row : t.rows) w.write_row(row);
}

int run_experiment(ExperimentConfig& c) {
    apply_defaults(c);
    const auto violations = validate_config(c);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << "config invalid: " << v << "\n";
        return 2;
    }
    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    const std::string csv_path = c.out_dir + "/" + c.name + ".csv";
    const std::string summary_path = c.out_dir + "/summary.json";
    const std::string manifest_path = c.out_dir + "/manifest.json";
    const std::string marker_path = c.out_dir + "/FAILED";

    Table table;
    try {
        table = dispatch(c);
    } catch (const std::exception& ex) {
        std::ofstream marker(marker_path);
        marker << "experiment " << c.name << " aborted: " << ex.what() << "\n";
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    fs::remove(marker_path);
    write_table_csv(csv_path, table);

    nlohmann::json summary;
    summary["experiment"] = c.name;
    summary["n_samples"] = c.n_samples;
    summary["master_seed"] = c.master_seed;
    summary["rows"] = table.rows.size();
    summary["schema"] = table.schema;
    summary["columns"] = table.columns;
    {
        std::ofstream os(summary_path);
        os << summary.dump(2) << "\n";
    }

    nlohmann::json manifest;
    manifest["config"] = serialize_config(c);
    manifest["config_hash"] = hex64(fnv1a_string(serialize_config(c).dump()));
    manifest["version"] = "1.0";
    nlohmann::json files = nlohmann::json::object();
    for (const std::string& p : {csv_path, summary_path})
        files[fs::path(p).filename().string()] = hex64(fnv1a_file(p));
    manifest["files"] = files;
    {
        std::ofstream os(manifest_path);
        os << manifest.dump(2) << "\n";
    }
    std::cout << c.name << ": " << table.rows.size() << " rows -> " << csv_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homoglab: lattice homogenization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    int samples_override = 0;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed_override, "override ensemble.master_seed");
        sub->add_option("--samples", samples_override, "override ensemble.n_samples");
        sub->add_option("--out", out_override, "override output.directory");
        sub->add_option("--threads", threads, "worker threads (default HOMOGLAB_THREADS or 1)");
    };

    CLI::App* cmd_validate = app.add_subcommand("validate", "dry-run config check");
    add_common(cmd_validate);
    CLI::App* cmd_run = app.add_subcommand("run", "run the experiment from the config");
    add_common(cmd_run);
    std::vector<CLI::App*> shorthands;
    for (const auto& name : homog::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_common(sub);
        shorthands.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    homog::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = homog::load_config(config_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    for (CLI::App* sub : shorthands)
        if (sub->parsed()) cfg.name = sub->get_name();
    if (seed_override != 0) cfg.master_seed = seed_override;
    if (samples_override > 0) cfg.n_samples = samples_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads > 0) {
        cfg.threads = threads;
    } else if (const char* env = std::getenv("HOMOGLAB_THREADS")) {
        cfg.threads = std::max(1, std::atoi(env));
    }

    if (cmd_validate->parsed()) {
        apply_defaults(cfg);
        const auto violations = homog::validate_config(cfg);
        if (violations.empty()) {
            std::cout << "config valid: experiment=" << cfg.name << " d=" << cfg.d
                      << " n=" << cfg.n << " beta=" << cfg.beta
                      << " samples=" << cfg.n_samples << "\n";
        } else {
            for (const auto& v : violations) std::cout << "violation: " << v << "\n";
        }
        return 0;
    }
    return run_experiment(cfg);
}

// nsdecay: scenario-driven spectral Galerkin simulator and verifier for
// incompressible flow on the periodic torus, with decay-bound overlays.
//
// Subcommands:
//   basis      dump the truncated eigenbasis as JSON
//   tensor     assemble (or load) the triad tensor cache and print stats
//   simulate   run a scenario, emit the energy trace CSV (+ snapshot)
//   resume     continue a run from a snapshot file
//   bounds     tabulate the decay envelopes and the extremal trajectory
//   verify     run the verification suite, emit a JSON report
//   overlay    simulate and align the trace with the bound curves
//
// Exit codes: 0 success, 2 validation failure, 3 numerical blow-up,
// 4 invariant violation.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nsdecay/scenario.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string cache_dir;
    std::string out_path;
    std::string variant;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required = true) {
    auto* config = cmd->add_option("--config", opts.config_path,
                                   "Scenario configuration file (JSON)");
    if (config_required) config->required();
    cmd->add_option("--cache-dir", opts.cache_dir,
                    "Tensor cache directory (overrides NSDECAY_CACHE_DIR)");
    cmd->add_option("--out", opts.out_path, "Output path override");
    cmd->add_option("--variant", opts.variant,
                    "Bound variant override: sharp or paper");
    cmd->add_option("--seed", opts.seed, "Seed override (non-negative)");
}

nsdecay::ScenarioConfig load_config(const CommonOptions& opts) {
    nsdecay::ScenarioConfig config =
        nsdecay::parse_scenario_file(opts.config_path);
    if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.variant.empty())
        config.bound_variant = nsdecay::parse_variant(opts.variant);
    return config;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
    } else {
        nsdecay::write_file(path, content);
        std::cerr << "wrote " << path << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin Navier-Stokes decay toolkit"};
    app.require_subcommand(1);

    CommonOptions basis_opts, tensor_opts, simulate_opts, resume_opts,
        bounds_opts, verify_opts, overlay_opts;
    std::string snapshot_path;

    auto* basis_cmd = app.add_subcommand("basis", "Dump the basis as JSON");
    add_common(basis_cmd, basis_opts);

    auto* tensor_cmd =
        app.add_subcommand("tensor", "Assemble and cache the triad tensor");
    add_common(tensor_cmd, tensor_opts);

    auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario");
    add_common(simulate_cmd, simulate_opts);

    auto* resume_cmd =
        app.add_subcommand("resume", "Continue a run from a snapshot");
    add_common(resume_cmd, resume_opts);
    resume_cmd->add_option("--snapshot", snapshot_path, "Snapshot JSON path")
        ->required();

    auto* bounds_cmd =
        app.add_subcommand("bounds", "Tabulate decay envelopes as CSV");
    add_common(bounds_cmd, bounds_opts);

    auto* verify_cmd =
        app.add_subcommand("verify", "Run the verification suite");
    add_common(verify_cmd, verify_opts);

    auto* overlay_cmd = app.add_subcommand(
        "overlay", "Simulate and overlay the trace with bound curves");
    add_common(overlay_cmd, overlay_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (basis_cmd->parsed()) {
            const auto config = load_config(basis_opts);
            const auto basis = nsdecay::build_basis(config.k_max);
            emit(basis_opts.out_path, nsdecay::basis_to_json(*basis).dump(2) + "\n");
        } else if (tensor_cmd->parsed()) {
            const auto config = load_config(tensor_opts);
            const auto basis = nsdecay::build_basis(config.k_max);
            const std::string cache_dir =
                nsdecay::resolve_cache_dir(tensor_opts.cache_dir);
            const auto tensor = nsdecay::load_or_assemble_tensor(*basis, cache_dir);
            std::cout << "m=" << tensor.m << " entries=" << tensor.entry_count()
                      << " grid_n=" << tensor.quadrature_grid_n << " cache="
                      << nsdecay::tensor_cache_path(cache_dir, basis->shell_max)
                      << "\n";
        } else if (simulate_cmd->parsed()) {
            const auto config = load_config(simulate_opts);
            const auto artifacts = nsdecay::run_scenario(
                config, simulate_opts.cache_dir, simulate_opts.out_path);
            const auto& last = artifacts.result.trace.rows.back();
            std::cerr << "final t=" << nsdecay::format_double(last.t)
                      << " g=" << nsdecay::format_double(last.g)
                      << " residual=" << nsdecay::format_double(last.energy_residual)
                      << "\n";
            if (artifacts.trace_path.empty()) std::cout << artifacts.trace_csv;
        } else if (resume_cmd->parsed()) {
            const auto config = load_config(resume_opts);
            const auto artifacts = nsdecay::resume_scenario(
                config, snapshot_path, resume_opts.cache_dir, resume_opts.out_path);
            if (artifacts.trace_path.empty()) std::cout << artifacts.trace_csv;
        } else if (bounds_cmd->parsed()) {
            const auto config = load_config(bounds_opts);
            nsdecay::BoundSpec spec;
            spec.gamma = config.nu;
            spec.envelope = config.envelope;
            spec.variant = config.bound_variant;
            if (config.initial.use_spectrum) {
                spec.g0 = config.initial.energy;
            } else {
                spec.g0 = 0.0;
                for (double c : config.initial.coefficients) spec.g0 += c * c;
            }
            std::vector<double> times;
            const double step = config.dt * config.sample_every;
            const long long n =
                static_cast<long long>(std::floor(config.t_end / step + 1e-9));
            for (long long i = 0; i <= n; ++i)
                times.push_back(static_cast<double>(i) * step);
            if (times.back() < config.t_end - 1e-12)
                times.push_back(config.t_end);
            const auto rows = nsdecay::bound_curves(spec, times);
            emit(bounds_opts.out_path, nsdecay::bounds_to_csv(rows));
        } else if (verify_cmd->parsed()) {
            const auto config = load_config(verify_opts);
            const auto report = nsdecay::verify_scenario(config, verify_opts.cache_dir);
            const std::string path = !verify_opts.out_path.empty()
                                         ? verify_opts.out_path
                                         : config.outputs.report_path;
            emit(path, report.doc.dump(2) + "\n");
            if (!report.ok) {
                std::cerr << "verify: invariant violation\n";
                return 4;
            }
        } else if (overlay_cmd->parsed()) {
            auto config = load_config(overlay_opts);
            config.outputs = nsdecay::OutputsConfig{};  // overlay is the artifact
            auto artifacts = nsdecay::run_scenario(config, overlay_opts.cache_dir);
            const auto bounds =
                nsdecay::bound_curves_for_trace(config, artifacts.result.trace);
            emit(overlay_opts.out_path,
                 nsdecay::overlay_to_csv(artifacts.result.trace, bounds));
        }
    } catch (const nsdecay::BlowupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const nsdecay::InvariantError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const nsdecay::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nsdecay::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

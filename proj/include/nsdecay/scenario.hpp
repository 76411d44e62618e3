/// Scenario-driven orchestration: strict JSON config ingestion, tensor
/// caching, run execution with artifact emission, snapshot resume, and
/// the verification suite behind the CLI `verify` subcommand.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsdecay/basis.hpp"
#include "nsdecay/bounds.hpp"
#include "nsdecay/csv.hpp"
#include "nsdecay/errors.hpp"
#include "nsdecay/forcing.hpp"
#include "nsdecay/interaction.hpp"
#include "nsdecay/json_io.hpp"
#include "nsdecay/solver.hpp"
#include "nsdecay/verification.hpp"

namespace nsdecay {

namespace detail {

/// Wrapper enforcing that every key of a JSON object is consumed; any
/// leftover key fails validation before computation starts.
class StrictObject {
  public:
    StrictObject(const nlohmann::json& doc, std::string path)
        : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object())
            throw ValidationError(path_ + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    const nlohmann::json& require(const std::string& key) {
        if (!doc_.contains(key))
            throw ValidationError(path_ + ": missing required key '" + key + "'");
        consumed_.insert(key);
        return doc_.at(key);
    }

    const nlohmann::json* find(const std::string& key) {
        if (!doc_.contains(key)) return nullptr;
        consumed_.insert(key);
        return &doc_.at(key);
    }

    template <typename T>
    T require_as(const std::string& key) {
        return convert<T>(require(key), key);
    }

    template <typename T>
    T get_or(const std::string& key, T fallback) {
        const nlohmann::json* v = find(key);
        return v ? convert<T>(*v, key) : fallback;
    }

    void finish() const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it) {
            if (!consumed_.count(it.key()))
                throw ValidationError(path_ + ": unknown key '" + it.key() + "'");
        }
    }

    const std::string& path() const { return path_; }

  private:
    template <typename T>
    T convert(const nlohmann::json& v, const std::string& key) {
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(path_ + "." + key + ": wrong type");
        }
    }

    const nlohmann::json& doc_;
    std::string path_;
    std::set<std::string> consumed_;
};

}  // namespace detail

struct InitialSpecConfig {
    bool use_spectrum = false;
    std::vector<double> coefficients;
    double energy = 1.0;
    double decay_exponent = 0.0;
};

struct WeightsConfig {
    WeightsRule rule = WeightsRule::LowestShell;
    std::vector<double> values;  // for Explicit
};

struct OutputsConfig {
    std::string trace_path;
    std::string report_path;
    std::string snapshot_path;
};

struct VerifyConfig {
    double delta = 1e-6;         // twin-trajectory perturbation
    double norm_threshold = std::numeric_limits<double>::infinity();
    double ceiling_tolerance = 0.1;
};

struct ScenarioConfig {
    std::string name;
    int k_max = 1;
    double nu = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::IfRk4;
    int sample_every = 1;
    std::uint64_t seed = 0;
    BoundVariant bound_variant = BoundVariant::Sharp;
    InitialSpecConfig initial;
    Envelope envelope = Envelope::zero();
    WeightsConfig weights;
    OutputsConfig outputs;
    VerifyConfig verify;

    SolverParams solver_params() const {
        SolverParams p;
        p.nu = nu;
        p.dt = dt;
        p.t_end = t_end;
        p.scheme = scheme;
        p.sample_every = sample_every;
        p.bound_variant = bound_variant;
        return p;
    }
};

inline Scheme parse_scheme(const std::string& s) {
    if (s == "rk4") return Scheme::Rk4;
    if (s == "if_rk4") return Scheme::IfRk4;
    throw ValidationError("scheme: expected 'rk4' or 'if_rk4', got '" + s + "'");
}

inline BoundVariant parse_variant(const std::string& s) {
    if (s == "sharp") return BoundVariant::Sharp;
    if (s == "paper") return BoundVariant::Paper;
    throw ValidationError("bound_variant: expected 'sharp' or 'paper', got '" +
                          s + "'");
}

inline Envelope parse_envelope(const nlohmann::json& doc, const std::string& path) {
    detail::StrictObject obj(doc, path);
    const std::string type = obj.require_as<std::string>("type");
    Envelope envelope = Envelope::zero();
    if (type == "zero") {
        // no parameters
    } else if (type == "cutoff") {
        const double t0 = obj.require_as<double>("t0");
        const double amplitude = obj.get_or<double>("amplitude", 1.0);
        envelope = Envelope::cutoff(t0, amplitude);
    } else if (type == "exponential") {
        const double rate = obj.require_as<double>("rate");
        const double amplitude = obj.get_or<double>("amplitude", 1.0);
        envelope = Envelope::exponential(rate, amplitude);
    } else if (type == "polynomial") {
        const double power = obj.require_as<double>("power");
        const double amplitude = obj.get_or<double>("amplitude", 1.0);
        envelope = Envelope::polynomial(power, amplitude);
    } else if (type == "table") {
        envelope = Envelope::table(obj.require_as<std::vector<double>>("times"),
                                   obj.require_as<std::vector<double>>("values"));
    } else {
        throw ValidationError(path + ".type: unknown envelope '" + type + "'");
    }
    obj.finish();
    return envelope;
}

inline ScenarioConfig parse_scenario(const nlohmann::json& doc) {
    detail::StrictObject root(doc, "config");
    ScenarioConfig config;
    config.name = root.require_as<std::string>("name");
    config.k_max = root.require_as<int>("k_max");
    if (config.k_max < 1)
        throw ValidationError("config.k_max: must be >= 1");
    config.nu = root.require_as<double>("nu");
    if (!(config.nu > 0.0)) throw ValidationError("config.nu: must be > 0");
    config.dt = root.require_as<double>("dt");
    if (!(config.dt > 0.0)) throw ValidationError("config.dt: must be > 0");
    config.t_end = root.require_as<double>("t_end");
    if (!(config.t_end >= config.dt))
        throw ValidationError("config.t_end: must be >= dt");
    config.scheme = parse_scheme(root.get_or<std::string>("scheme", "if_rk4"));
    config.sample_every = root.get_or<int>("sample_every", 1);
    if (config.sample_every < 1)
        throw ValidationError("config.sample_every: must be >= 1");
    config.seed = root.get_or<std::uint64_t>("seed", 0);
    config.bound_variant =
        parse_variant(root.get_or<std::string>("bound_variant", "sharp"));

    {
        detail::StrictObject initial(root.require("initial"), "config.initial");
        const std::string type = initial.require_as<std::string>("type");
        if (type == "coefficients") {
            config.initial.use_spectrum = false;
            config.initial.coefficients =
                initial.require_as<std::vector<double>>("values");
        } else if (type == "spectrum") {
            config.initial.use_spectrum = true;
            config.initial.energy = initial.require_as<double>("energy");
            if (!(config.initial.energy >= 0.0))
                throw ValidationError("config.initial.energy: must be >= 0");
            config.initial.decay_exponent =
                initial.get_or<double>("decay_exponent", 0.0);
        } else {
            throw ValidationError(
                "config.initial.type: expected 'coefficients' or 'spectrum'");
        }
        initial.finish();
    }

    if (const nlohmann::json* forcing_doc = root.find("forcing")) {
        detail::StrictObject forcing(*forcing_doc, "config.forcing");
        if (const nlohmann::json* env = forcing.find("envelope"))
            config.envelope = parse_envelope(*env, "config.forcing.envelope");
        if (const nlohmann::json* weights_doc = forcing.find("weights")) {
            detail::StrictObject weights(*weights_doc, "config.forcing.weights");
            const std::string rule = weights.require_as<std::string>("rule");
            if (rule == "lowest_shell") {
                config.weights.rule = WeightsRule::LowestShell;
            } else if (rule == "uniform") {
                config.weights.rule = WeightsRule::Uniform;
            } else if (rule == "first_mode") {
                config.weights.rule = WeightsRule::FirstMode;
            } else if (rule == "explicit") {
                config.weights.rule = WeightsRule::Explicit;
                config.weights.values =
                    weights.require_as<std::vector<double>>("values");
            } else {
                throw ValidationError(
                    "config.forcing.weights.rule: unknown rule '" + rule + "'");
            }
            weights.finish();
        }
        forcing.finish();
    }

    if (const nlohmann::json* outputs_doc = root.find("outputs")) {
        detail::StrictObject outputs(*outputs_doc, "config.outputs");
        config.outputs.trace_path = outputs.get_or<std::string>("trace", "");
        config.outputs.report_path = outputs.get_or<std::string>("report", "");
        config.outputs.snapshot_path = outputs.get_or<std::string>("snapshot", "");
        outputs.finish();
    }

    if (const nlohmann::json* verify_doc = root.find("verify")) {
        detail::StrictObject verify(*verify_doc, "config.verify");
        config.verify.delta = verify.get_or<double>("delta", 1e-6);
        if (!(config.verify.delta >= 0.0))
            throw ValidationError("config.verify.delta: must be >= 0");
        config.verify.norm_threshold = verify.get_or<double>(
            "norm_threshold", std::numeric_limits<double>::infinity());
        config.verify.ceiling_tolerance =
            verify.get_or<double>("ceiling_tolerance", 0.1);
        verify.finish();
    }

    root.finish();

    // Table envelopes must cover the whole run.
    if (config.envelope.kind() == EnvelopeKind::Table &&
        !(config.envelope.evaluable_at(0.0) &&
          config.envelope.evaluable_at(config.t_end)))
        throw ValidationError(
            "config.forcing.envelope: table must cover [0, t_end]");
    return config;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    if (path.empty()) return;
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
}

inline ScenarioConfig parse_scenario_file(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config parse error in " + path + ": " + e.what());
    }
    return parse_scenario(doc);
}

/// Cache dir resolution: explicit value > NSDECAY_CACHE_DIR > default.
inline std::string resolve_cache_dir(const std::string& explicit_dir = "") {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const char* env = std::getenv("NSDECAY_CACHE_DIR"); env && *env)
        return env;
    return ".nsdecay-cache";
}

inline std::string tensor_cache_path(const std::string& cache_dir, int shell_max) {
    return cache_dir + "/tensor_shell" + std::to_string(shell_max) + "_v" +
           std::to_string(kTensorFormatVersion) + ".json";
}

/// Load the cached tensor for this truncation or assemble and cache it.
/// Stale format versions are ignored and rewritten, never reused.
inline InteractionTensor load_or_assemble_tensor(const Basis& basis,
                                                 const std::string& cache_dir) {
    const std::string path = tensor_cache_path(cache_dir, basis.shell_max);
    if (std::filesystem::exists(path)) {
        try {
            const nlohmann::json doc = nlohmann::json::parse(read_file(path));
            InteractionTensor tensor;
            if (tensor_from_json(doc, basis.shell_max, tensor) &&
                tensor.m == basis.m())
                return tensor;
        } catch (const nlohmann::json::exception&) {
            // fall through to reassembly
        }
    }
    InteractionTensor tensor = assemble_tensor(basis);
    std::filesystem::create_directories(cache_dir);
    write_file(path, tensor_to_json(tensor).dump());
    return tensor;
}

inline CoefficientState initial_state_from_config(
    const ScenarioConfig& config, std::shared_ptr<const Basis> basis) {
    if (config.initial.use_spectrum) {
        SpectrumSpec spec;
        spec.energy = config.initial.energy;
        spec.decay_exponent = config.initial.decay_exponent;
        spec.seed = config.seed;
        return project_initial(spec, std::move(basis));
    }
    return project_initial(config.initial.coefficients, std::move(basis));
}

inline ForcingProfile forcing_from_config(const ScenarioConfig& config,
                                          const Basis& basis) {
    return make_forcing(config.envelope, config.weights.rule, basis,
                        config.weights.values);
}

struct RunArtifacts {
    IntegrationResult result;
    std::string trace_csv;
    std::string trace_path;     // empty when not written
    std::string snapshot_path;  // empty when not written
};

/// Execute a scenario: tensor from cache, project, integrate, emit. On
/// blow-up the partial trace is persisted before the error propagates.
inline RunArtifacts run_scenario(const ScenarioConfig& config,
                                 const std::string& cache_dir = "",
                                 const std::string& trace_override = "") {
    const auto basis = build_basis(config.k_max);
    const InteractionTensor tensor =
        load_or_assemble_tensor(*basis, resolve_cache_dir(cache_dir));
    const CoefficientState initial = initial_state_from_config(config, basis);
    const ForcingProfile forcing = forcing_from_config(config, *basis);
    const SolverParams params = config.solver_params();

    const std::string trace_path =
        !trace_override.empty() ? trace_override : config.outputs.trace_path;

    RunArtifacts artifacts;
    std::vector<TraceRow> partial_rows;
    try {
        artifacts.result =
            integrate(initial, tensor, forcing, params, false,
                      [&](const TraceRow& row) { partial_rows.push_back(row); });
    } catch (const BlowupError&) {
        EnergyTrace partial;
        partial.rows = std::move(partial_rows);
        write_file(trace_path, trace_to_csv(partial));
        throw;
    }

    artifacts.trace_csv = trace_to_csv(artifacts.result.trace);
    if (!trace_path.empty()) {
        write_file(trace_path, artifacts.trace_csv);
        artifacts.trace_path = trace_path;
    }
    if (!config.outputs.snapshot_path.empty()) {
        write_file(config.outputs.snapshot_path,
                   snapshot_to_json(artifacts.result.final_state, config.nu).dump());
        artifacts.snapshot_path = config.outputs.snapshot_path;
    }
    return artifacts;
}

/// Resume from a snapshot through config.t_end. The snapshot must carry
/// the same truncation and the same viscosity; a physics change mid-run
/// is rejected.
inline RunArtifacts resume_scenario(const ScenarioConfig& config,
                                    const std::string& snapshot_path,
                                    const std::string& cache_dir = "",
                                    const std::string& trace_override = "") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(snapshot_path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("snapshot parse error in " + snapshot_path + ": " +
                              e.what());
    }
    const Snapshot snap = snapshot_from_json(doc);
    const auto basis = build_basis(config.k_max);
    if (snap.basis_id != basis->id())
        throw ValidationError("resume: snapshot basis " + snap.basis_id +
                              " does not match config truncation " + basis->id());
    if (snap.nu != config.nu)
        throw ValidationError(
            "resume: viscosity change mid-run is not supported (snapshot nu=" +
            std::to_string(snap.nu) + ", config nu=" + std::to_string(config.nu) +
            ")");
    if (static_cast<int>(snap.c.size()) != basis->m())
        throw ValidationError("resume: snapshot coefficient length mismatch");

    CoefficientState state;
    state.t = snap.t;
    state.c = snap.c;
    state.basis = basis;

    const InteractionTensor tensor =
        load_or_assemble_tensor(*basis, resolve_cache_dir(cache_dir));
    const ForcingProfile forcing = forcing_from_config(config, *basis);
    const SolverParams params = config.solver_params();

    RunArtifacts artifacts;
    artifacts.result = integrate(state, tensor, forcing, params);
    artifacts.trace_csv = trace_to_csv(artifacts.result.trace);
    const std::string trace_path =
        !trace_override.empty() ? trace_override : config.outputs.trace_path;
    if (!trace_path.empty()) {
        write_file(trace_path, artifacts.trace_csv);
        artifacts.trace_path = trace_path;
    }
    if (!config.outputs.snapshot_path.empty()) {
        write_file(config.outputs.snapshot_path,
                   snapshot_to_json(artifacts.result.final_state, config.nu).dump());
        artifacts.snapshot_path = config.outputs.snapshot_path;
    }
    return artifacts;
}

/// Bound curves evaluated on the scenario's trace grid.
inline std::vector<BoundCurveRow> bound_curves_for_trace(
    const ScenarioConfig& config, const EnergyTrace& trace) {
    BoundSpec spec;
    spec.gamma = config.nu;  // lambda_1 = 1
    spec.g0 = trace.g_start;
    spec.envelope = config.envelope;
    spec.variant = config.bound_variant;
    std::vector<double> times;
    for (const TraceRow& row : trace.rows) times.push_back(row.t);
    return bound_curves(spec, times);
}

struct VerifyReport {
    nlohmann::json doc;
    bool ok = false;
};

/// The verification suite behind `verify`: twin-trajectory Gronwall
/// diagnostics, the norm-bound hypotheses, the functional inequalities,
/// and cross-module dominance of the simulated energy by the sharp bound.
inline VerifyReport verify_scenario(const ScenarioConfig& config,
                                    const std::string& cache_dir = "") {
    const auto basis = build_basis(config.k_max);
    const InteractionTensor tensor =
        load_or_assemble_tensor(*basis, resolve_cache_dir(cache_dir));
    const CoefficientState ic1 = initial_state_from_config(config, basis);
    const ForcingProfile forcing = forcing_from_config(config, *basis);
    const SolverParams params = config.solver_params();

    CoefficientState ic2 = ic1;
    if (!ic2.c.empty()) ic2.c[0] += config.verify.delta;

    const UniquenessReport uniq = uniqueness_experiment(
        ic1, ic2, tensor, forcing, params, config.verify.ceiling_tolerance);

    const auto run_v = integrate(ic1, tensor, forcing, params);
    const NormBoundReport norms =
        dirichlet_norm_check(run_v.trace, config.verify.norm_threshold);

    // Dominance against the sharp variant regardless of the configured one.
    BoundSpec sharp;
    sharp.gamma = config.nu;
    sharp.g0 = run_v.trace.g_start;
    sharp.envelope = config.envelope;
    sharp.variant = BoundVariant::Sharp;
    bool dominated = true;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (const TraceRow& row : run_v.trace.rows) {
        const double bg = bound_g(sharp, row.t, run_v.trace.t_start);
        worst_slack = std::min(worst_slack, bg - row.g);
        if (row.g > bg + 1e-9 * std::max(1.0, run_v.trace.g_start))
            dominated = false;
    }

    const auto [g0, G0] = energy(ic1);
    double poincare = 0.0;
    double ladyzhenskaya = 0.0;
    if (g0 > 0.0) {
        poincare = poincare_check(ic1);
        ladyzhenskaya = ladyzhenskaya_ratio(ic1, 4 * basis->k_max + 1);
    }

    std::string diff_csv = "t,h,H\n";
    for (std::size_t i = 0; i < uniq.t.size(); ++i) {
        diff_csv += format_double(uniq.t[i]);
        diff_csv += ',';
        diff_csv += format_double(uniq.h[i]);
        diff_csv += ',';
        diff_csv += format_double(uniq.H[i]);
        diff_csv += '\n';
    }

    const bool poincare_ok = g0 == 0.0 || poincare >= 1.0 - 1e-12;
    const bool h_exact_zero_ok =
        config.verify.delta > 0.0 || uniq.gronwall_ok;  // delta=0: h must stay 0
    const bool ok = uniq.gronwall_ok && poincare_ok && dominated &&
                    norms.within && h_exact_zero_ok;

    VerifyReport report;
    report.ok = ok;
    report.doc = {
        {"name", config.name},
        {"basis_id", basis->id()},
        {"m", basis->m()},
        {"uniqueness",
         {{"delta", config.verify.delta},
          {"h0", uniq.h0},
          {"c_hat", uniq.c_hat},
          {"ceiling_rate", uniq.ceiling_rate},
          {"gronwall_ok", uniq.gronwall_ok},
          {"sup_norm_v", uniq.sup_norm_v},
          {"serrin_integral", uniq.serrin_integral},
          {"difference_trace_csv", diff_csv}}},
        {"norm_bounds",
         {{"sup_norm", norms.sup_norm},
          {"threshold", config.verify.norm_threshold == std::numeric_limits<double>::infinity()
                            ? nlohmann::json("inf")
                            : nlohmann::json(config.verify.norm_threshold)},
          {"within", norms.within},
          {"serrin_integral", norms.serrin_integral}}},
        {"inequalities",
         {{"poincare_ratio", poincare},
          {"poincare_ok", poincare_ok},
          {"ladyzhenskaya_ratio", ladyzhenskaya}}},
        {"dominance",
         {{"sharp_bound_dominates", dominated}, {"worst_slack", worst_slack}}},
        {"trace_csv", trace_to_csv(run_v.trace)},
        {"ok", ok}};
    return report;
}

}  // namespace nsdecay

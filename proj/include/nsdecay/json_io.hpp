/// JSON serialization: basis description, interaction-tensor cache files
/// (keyed by shell and format version), and resumable state snapshots.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nsdecay/basis.hpp"
#include "nsdecay/errors.hpp"
#include "nsdecay/interaction.hpp"

namespace nsdecay {

inline constexpr int kSnapshotFormatVersion = 1;

inline nlohmann::json basis_to_json(const Basis& basis) {
    nlohmann::json doc;
    doc["k_max"] = basis.k_max;
    doc["shell_max"] = basis.shell_max;
    doc["m"] = basis.m();
    doc["lambda_min"] = basis.lambda_min;
    nlohmann::json modes = nlohmann::json::array();
    for (const Mode& mode : basis.modes) {
        modes.push_back({{"k", {mode.k.x, mode.k.y, mode.k.z}},
                         {"polarization", mode.polarization},
                         {"parity", mode.parity == Parity::Cosine ? "cosine" : "sine"},
                         {"lambda", mode.lambda}});
    }
    doc["modes"] = std::move(modes);
    return doc;
}

inline nlohmann::json tensor_to_json(const InteractionTensor& tensor) {
    nlohmann::json doc;
    doc["format_version"] = kTensorFormatVersion;
    doc["k_max"] = tensor.k_max;
    doc["shell_max"] = tensor.shell_max;
    doc["m"] = tensor.m;
    doc["grid_n"] = tensor.quadrature_grid_n;
    nlohmann::json entries = nlohmann::json::array();
    for (int j = 0; j < tensor.m; ++j) {
        for (const TensorEntry& e : tensor.by_j[j]) {
            entries.push_back({e.p, e.q, j, e.value});
        }
    }
    doc["entries"] = std::move(entries);
    return doc;
}

/// Returns false (not an exception) for a stale format version, so callers
/// can fall back to reassembly; structural corruption throws.
inline bool tensor_from_json(const nlohmann::json& doc, int expected_shell,
                             InteractionTensor& out) {
    if (!doc.is_object() || !doc.contains("format_version")) return false;
    if (doc["format_version"].get<int>() != kTensorFormatVersion) return false;
    if (doc["shell_max"].get<int>() != expected_shell) return false;
    InteractionTensor tensor;
    tensor.k_max = doc.at("k_max").get<int>();
    tensor.shell_max = doc.at("shell_max").get<int>();
    tensor.m = doc.at("m").get<int>();
    tensor.quadrature_grid_n = doc.at("grid_n").get<int>();
    if (tensor.m <= 0) throw ValidationError("tensor cache: bad m");
    tensor.by_j.resize(tensor.m);
    for (const auto& row : doc.at("entries")) {
        if (!row.is_array() || row.size() != 4)
            throw ValidationError("tensor cache: malformed entry");
        const int p = row[0].get<int>();
        const int q = row[1].get<int>();
        const int j = row[2].get<int>();
        const double value = row[3].get<double>();
        if (p < 0 || p >= tensor.m || q < 0 || q >= tensor.m || j < 0 ||
            j >= tensor.m)
            throw ValidationError("tensor cache: entry index out of range");
        tensor.by_j[j].push_back({p, q, value});
        tensor.lookup_.emplace(tensor.key(p, q, j), value);
    }
    out = std::move(tensor);
    return true;
}

inline nlohmann::json snapshot_to_json(const CoefficientState& state,
                                       double nu) {
    nlohmann::json doc;
    doc["format_version"] = kSnapshotFormatVersion;
    doc["basis_id"] = state.basis->id();
    doc["k_max"] = state.basis->k_max;
    doc["shell_max"] = state.basis->shell_max;
    doc["nu"] = nu;
    doc["t"] = state.t;
    doc["c"] = state.c;
    return doc;
}

struct Snapshot {
    int k_max = 0;
    int shell_max = 0;
    std::string basis_id;
    double nu = 0.0;
    double t = 0.0;
    std::vector<double> c;
};

inline Snapshot snapshot_from_json(const nlohmann::json& doc) {
    if (!doc.is_object())
        throw ValidationError("snapshot: not a JSON object");
    if (!doc.contains("format_version") ||
        doc["format_version"].get<int>() != kSnapshotFormatVersion)
        throw ValidationError("snapshot: unsupported format version");
    Snapshot snap;
    try {
        snap.k_max = doc.at("k_max").get<int>();
        snap.shell_max = doc.at("shell_max").get<int>();
        snap.basis_id = doc.at("basis_id").get<std::string>();
        snap.nu = doc.at("nu").get<double>();
        snap.t = doc.at("t").get<double>();
        snap.c = doc.at("c").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("snapshot: ") + e.what());
    }
    return snap;
}

}  // namespace nsdecay

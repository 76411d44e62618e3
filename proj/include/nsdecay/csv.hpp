/// CSV emission with shortest round-trip decimal formatting, so reruns of
/// the same configuration are byte-identical and values reload exactly.
#pragma once

#include <charconv>
#include <string>
#include <vector>

#include "nsdecay/bounds.hpp"
#include "nsdecay/errors.hpp"
#include "nsdecay/solver.hpp"

namespace nsdecay {

inline std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Trace CSV, fixed column order.
inline std::string trace_to_csv(const EnergyTrace& trace) {
    std::string out = "t,g,G,b,energy_residual,bound_sqrt_g,bound_g\n";
    for (const TraceRow& row : trace.rows) {
        out += format_double(row.t);
        out += ',';
        out += format_double(row.g);
        out += ',';
        out += format_double(row.G);
        out += ',';
        out += format_double(row.b);
        out += ',';
        out += format_double(row.energy_residual);
        out += ',';
        out += format_double(row.bound_sqrt_g);
        out += ',';
        out += format_double(row.bound_g);
        out += '\n';
    }
    return out;
}

struct BoundCurveRow {
    double t = 0.0;
    double bound_sqrt_g = 0.0;
    double bound_g = 0.0;
    double extremal_g = 0.0;
    double I = 0.0;
    double b = 0.0;
};

/// Bound curves on a given time grid (aligned with simulator traces for
/// overlay plotting).
inline std::vector<BoundCurveRow> bound_curves(const BoundSpec& spec,
                                               const std::vector<double>& times) {
    const auto extremal = extremal_ode(spec, times);
    std::vector<BoundCurveRow> rows(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        rows[i].t = times[i];
        rows[i].bound_sqrt_g = bound_sqrt_g(spec, times[i]);
        rows[i].bound_g = bound_g(spec, times[i]);
        rows[i].extremal_g = extremal.g[i];
        rows[i].I = convolution_bound(spec, times[i]);
        rows[i].b = spec.envelope(times[i]);
    }
    return rows;
}

inline std::string bounds_to_csv(const std::vector<BoundCurveRow>& rows) {
    std::string out = "t,bound_sqrt_g,bound_g,extremal_g,I,b\n";
    for (const BoundCurveRow& row : rows) {
        out += format_double(row.t);
        out += ',';
        out += format_double(row.bound_sqrt_g);
        out += ',';
        out += format_double(row.bound_g);
        out += ',';
        out += format_double(row.extremal_g);
        out += ',';
        out += format_double(row.I);
        out += ',';
        out += format_double(row.b);
        out += '\n';
    }
    return out;
}

/// Overlay of simulated energies with the bound curves on one grid. The
/// g_le_bound_g column flags dominance violations; extremal_le_sqrt_sq
/// compares the extremal trajectory against bound_sqrt_g^2 and exposes the
/// halved-coefficient variant whenever the forcing is active.
inline std::string overlay_to_csv(const EnergyTrace& trace,
                                  const std::vector<BoundCurveRow>& bounds) {
    if (trace.rows.size() != bounds.size())
        throw ValidationError("overlay: trace and bound grids differ in length");
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (std::abs(trace.rows[i].t - bounds[i].t) >
            1e-12 * (1.0 + std::abs(bounds[i].t)))
            throw ValidationError("overlay: time grids do not match");
    }
    std::string out =
        "t,g,G,bound_sqrt_g_sq,bound_g,extremal_g,g_le_bound_g,extremal_le_sqrt_sq\n";
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const TraceRow& row = trace.rows[i];
        const BoundCurveRow& bc = bounds[i];
        const double sqrt_sq = bc.bound_sqrt_g * bc.bound_sqrt_g;
        const bool dominated = row.g <= bc.bound_g;
        const bool extremal_ok = bc.extremal_g <= sqrt_sq * (1.0 + 1e-6) + 1e-12;
        out += format_double(row.t);
        out += ',';
        out += format_double(row.g);
        out += ',';
        out += format_double(row.G);
        out += ',';
        out += format_double(sqrt_sq);
        out += ',';
        out += format_double(bc.bound_g);
        out += ',';
        out += format_double(bc.extremal_g);
        out += ',';
        out += dominated ? '1' : '0';
        out += ',';
        out += extremal_ok ? '1' : '0';
        out += '\n';
    }
    return out;
}

}  // namespace nsdecay

/// Quantitative certification of the analytical skeleton on Galerkin
/// trajectories: twin-trajectory Gronwall growth, the bounded-Dirichlet-
/// norm and time-integrated fourth-power hypotheses, the functional
/// inequalities (Poincare, Ladyzhenskaya), uniform-in-m decay, and the
/// nested-truncation convergence study.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nsdecay/basis.hpp"
#include "nsdecay/bounds.hpp"
#include "nsdecay/errors.hpp"
#include "nsdecay/forcing.hpp"
#include "nsdecay/interaction.hpp"
#include "nsdecay/solver.hpp"

namespace nsdecay {

namespace stats {

/// Slope of the least-squares line through (x, y).
inline double least_squares_slope(const std::vector<double>& x,
                                  const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("least_squares_slope: need >= 2 aligned points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ValidationError("least_squares_slope: degenerate x");
    return (n * sxy - sx * sy) / denom;
}

/// Spearman rank correlation of values against their index order.
inline double spearman_rho_vs_index(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw ValidationError("spearman: need >= 2 values");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> rank(n);
    for (std::size_t pos = 0; pos < n;) {
        std::size_t end = pos;
        while (end + 1 < n && values[order[end + 1]] == values[order[pos]]) ++end;
        const double avg = 0.5 * (pos + end) + 1.0;  // average rank for ties
        for (std::size_t k = pos; k <= end; ++k) rank[order[k]] = avg;
        pos = end + 1;
    }
    // Pearson correlation of (rank_i, i).
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = static_cast<double>(i) + 1.0;
        sx += xi;
        sy += rank[i];
        sxx += xi * xi;
        syy += rank[i] * rank[i];
        sxy += xi * rank[i];
    }
    const double nn = static_cast<double>(n);
    const double cov = nn * sxy - sx * sy;
    const double vx = nn * sxx - sx * sx;
    const double vy = nn * syy - sy * sy;
    if (vx == 0.0 || vy == 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

/// Trapezoid rule over sampled rows (general spacing).
inline double trapezoid(const std::vector<double>& t,
                        const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 2)
        throw ValidationError("trapezoid: need >= 2 aligned samples");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
    return acc;
}

}  // namespace stats

/// Twin-trajectory difference diagnostics for u = v - w.
struct UniquenessReport {
    std::vector<double> t;
    std::vector<double> h;  // |u|^2
    std::vector<double> H;  // ||u||^2
    double h0 = 0.0;
    double c_hat = 0.0;           // log-linear Gronwall rate, first half
    double sup_norm_v = 0.0;      // sup_t ||v(t)||
    double serrin_integral = 0.0; // int ||v||^4 ds
    bool gronwall_ok = false;     // h stays below the fitted ceiling
    double ceiling_rate = 0.0;
};

/// Run both initial states with identical integrator settings and report
/// the Gronwall diagnostics. With bitwise-identical initial data the two
/// deterministic runs coincide and h is exactly zero.
inline UniquenessReport uniqueness_experiment(
    const CoefficientState& ic1, const CoefficientState& ic2,
    const InteractionTensor& tensor, const ForcingProfile& forcing,
    const SolverParams& params, double ceiling_tolerance = 0.1) {
    if (!ic1.basis || !ic2.basis || ic1.basis->id() != ic2.basis->id())
        throw ValidationError("uniqueness_experiment: basis mismatch");
    if (ic1.t != ic2.t)
        throw ValidationError("uniqueness_experiment: start times differ");
    if (ic1.c.size() != ic2.c.size())
        throw ValidationError("uniqueness_experiment: dimension mismatch");

    auto run_v = integrate(ic1, tensor, forcing, params, /*record_states=*/true);
    auto run_w = integrate(ic2, tensor, forcing, params, /*record_states=*/true);

    const Basis& basis = *ic1.basis;
    UniquenessReport report;
    const std::size_t n = run_v.trace.rows.size();
    report.t.resize(n);
    report.h.resize(n);
    report.H.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.t[i] = run_v.trace.rows[i].t;
        double h = 0.0, H = 0.0;
        const auto& cv = run_v.states[i];
        const auto& cw = run_w.states[i];
        for (int j = 0; j < basis.m(); ++j) {
            const double d = cv[j] - cw[j];
            h += d * d;
            H += basis.modes[j].lambda * d * d;
        }
        report.h[i] = h;
        report.H[i] = H;
    }
    report.h0 = report.h.front();

    std::vector<double> Gv(n);
    for (std::size_t i = 0; i < n; ++i) Gv[i] = run_v.trace.rows[i].G;
    report.sup_norm_v = 0.0;
    for (double G : Gv) report.sup_norm_v = std::max(report.sup_norm_v, std::sqrt(G));
    std::vector<double> G2(n);
    for (std::size_t i = 0; i < n; ++i) G2[i] = Gv[i] * Gv[i];
    report.serrin_integral = stats::trapezoid(report.t, G2);

    if (report.h0 == 0.0) {
        report.c_hat = 0.0;
        report.ceiling_rate = 0.0;
        report.gronwall_ok =
            std::all_of(report.h.begin(), report.h.end(),
                        [](double h) { return h == 0.0; });
        return report;
    }

    // Fit ln h on the first half only; the late samples can sit on the
    // roundoff floor and would drag the slope.
    const double t_mid = report.t.front() + 0.5 * (report.t.back() - report.t.front());
    std::vector<double> ts, ls;
    for (std::size_t i = 0; i < n; ++i) {
        if (report.t[i] <= t_mid && report.h[i] > 1e-280) {
            ts.push_back(report.t[i]);
            ls.push_back(std::log(report.h[i]));
        }
    }
    report.c_hat = ts.size() >= 2 ? stats::least_squares_slope(ts, ls) : 0.0;

    // Ceiling rate relaxed by the tolerance in the growth direction.
    report.ceiling_rate =
        report.c_hat + ceiling_tolerance * std::abs(report.c_hat) + 1e-9;
    report.gronwall_ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double ceiling =
            report.h0 *
            std::exp(report.ceiling_rate * (report.t[i] - report.t.front())) *
            (1.0 + 1e-9);
        if (report.h[i] > ceiling) {
            report.gronwall_ok = false;
            break;
        }
    }
    return report;
}

struct NormBoundReport {
    double sup_norm = 0.0;        // sup_t ||v(t)|| over the sampled trace
    bool within = false;          // sup_norm <= threshold
    double serrin_integral = 0.0; // int ||v||^4 ds, trapezoid on the trace
};

/// The two uniqueness hypotheses, surfaced rather than assumed: a uniform
/// Dirichlet-norm bound and the time-integrated fourth power.
inline NormBoundReport dirichlet_norm_check(const EnergyTrace& trace,
                                            double threshold) {
    if (trace.rows.empty())
        throw ValidationError("dirichlet_norm_check: empty trace");
    NormBoundReport report;
    std::vector<double> t, G2;
    for (const TraceRow& row : trace.rows) {
        report.sup_norm = std::max(report.sup_norm, std::sqrt(row.G));
        t.push_back(row.t);
        G2.push_back(row.G * row.G);
    }
    report.serrin_integral = t.size() >= 2 ? stats::trapezoid(t, G2) : 0.0;
    report.within = report.sup_norm <= threshold;
    return report;
}

/// r = ||v||^2_{L4} / (|v|^{1/2} ||v||^{3/2}); the quartic integrand is
/// integrated exactly on grid_n >= 4*k_max+1.
inline double ladyzhenskaya_ratio(const CoefficientState& state, int grid_n) {
    const Basis& basis = *state.basis;
    if (grid_n < 4 * basis.k_max + 1)
        throw AliasingError(
            "ladyzhenskaya_ratio: grid_n must be >= 4*k_max+1 = " +
            std::to_string(4 * basis.k_max + 1));
    const auto [g, G] = energy(state);
    if (g == 0.0)
        throw DivisionError("ladyzhenskaya_ratio: zero state");
    const auto field = evaluate_field(state, grid_n);
    double quartic = 0.0;
    for (const Vec3d& v : field) {
        const double v2 = dot(v, v);
        quartic += v2 * v2;
    }
    quartic *= kBoxVolume / static_cast<double>(field.size());
    const double l4_sq = std::sqrt(quartic);
    return l4_sq / (std::pow(g, 0.25) * std::pow(G, 0.75));
}

/// Rayleigh ratio G/g; >= lambda_1 = 1 with equality on the lowest shell.
inline double poincare_check(const CoefficientState& state) {
    const auto [g, G] = energy(state);
    if (g == 0.0) throw DivisionError("poincare_check: zero state");
    return G / g;
}

/// Shared inputs of the m-refinement studies. Initial data is fixed once
/// (either an explicit list or a seeded spectrum drawn on the largest
/// truncation) and prefix-projected onto each nested basis, which is the
/// discrete counterpart of projecting one v0 onto every P_m.
struct RefinementScenario {
    bool use_spectrum = false;
    std::vector<double> coefficients;  // explicit master list
    SpectrumSpec spectrum;             // drawn on the largest basis
    Envelope envelope = Envelope::zero();
    WeightsRule weights_rule = WeightsRule::LowestShell;
    SolverParams params;
};

struct UniformDecayTable {
    std::vector<int> k_max;
    std::vector<int> m;
    std::vector<double> sup_reweighted;  // sup_t g_m(t) e^{2 gamma t}
    double spearman = 0.0;
    bool increasing_trend = false;
    bool bounded = false;  // max/min <= ratio_limit
};

namespace detail {

inline std::vector<double> master_coefficients(
    const RefinementScenario& scenario, std::shared_ptr<const Basis> largest) {
    if (scenario.use_spectrum)
        return project_initial(scenario.spectrum, std::move(largest)).c;
    if (static_cast<int>(scenario.coefficients.size()) > largest->m())
        throw TruncationError(
            "refinement scenario: master coefficients exceed largest basis");
    return scenario.coefficients;
}

inline IntegrationResult run_truncation(const RefinementScenario& scenario,
                                        std::shared_ptr<const Basis> basis,
                                        const std::vector<double>& master) {
    std::vector<double> coeffs(
        master.begin(),
        master.begin() + std::min<std::size_t>(master.size(), basis->m()));
    CoefficientState initial = project_initial(coeffs, basis);
    const InteractionTensor tensor = assemble_tensor(*basis);
    const ForcingProfile forcing =
        make_forcing(scenario.envelope, scenario.weights_rule, *basis);
    return integrate(initial, tensor, forcing, scenario.params);
}

}  // namespace detail

/// Uniform-in-m decay: for each truncation, the sup of the exponentially
/// reweighted energy. Requires a forcing envelope decaying at least like
/// e^{-2 gamma t}; anything slower cannot certify the e^{-2 gamma t} class.
inline UniformDecayTable uniform_decay_check(const RefinementScenario& scenario,
                                             const std::vector<int>& k_max_list,
                                             double ratio_limit = 1.5) {
    if (k_max_list.size() < 2)
        throw ValidationError("uniform_decay_check: need >= 2 truncations");
    for (std::size_t i = 0; i + 1 < k_max_list.size(); ++i)
        if (!(k_max_list[i] < k_max_list[i + 1]))
            throw ValidationError("uniform_decay_check: k_max list must ascend");

    const double gamma = scenario.params.nu;  // lambda_1 = 1 on the torus
    switch (scenario.envelope.kind()) {
        case EnvelopeKind::Zero:
        case EnvelopeKind::Cutoff:
            break;
        case EnvelopeKind::Exponential:
            if (scenario.envelope.rate() < 2.0 * gamma - 1e-12)
                throw ValidationError(
                    "uniform_decay_check: envelope must decay at least like "
                    "e^{-2 gamma t}; exponential rate " +
                    std::to_string(scenario.envelope.rate()) + " < 2*gamma = " +
                    std::to_string(2.0 * gamma));
            break;
        default:
            throw ValidationError(
                "uniform_decay_check: envelope family cannot certify the "
                "e^{-2 gamma t} decay class (" +
                scenario.envelope.describe() + ")");
    }

    const auto largest = build_basis(k_max_list.back());
    const auto master = detail::master_coefficients(scenario, largest);

    UniformDecayTable table;
    for (int k_max : k_max_list) {
        const auto basis = build_basis(k_max);
        const auto result = detail::run_truncation(scenario, basis, master);
        double sup = 0.0;
        for (const TraceRow& row : result.trace.rows) {
            sup = std::max(sup,
                           row.g * std::exp(2.0 * gamma * (row.t -
                                                           result.trace.t_start)));
        }
        table.k_max.push_back(k_max);
        table.m.push_back(basis->m());
        table.sup_reweighted.push_back(sup);
    }
    table.spearman = stats::spearman_rho_vs_index(table.sup_reweighted);
    table.increasing_trend = table.spearman >= 0.99;
    const double lo =
        *std::min_element(table.sup_reweighted.begin(), table.sup_reweighted.end());
    const double hi =
        *std::max_element(table.sup_reweighted.begin(), table.sup_reweighted.end());
    table.bounded = lo == 0.0 ? hi == 0.0 : hi / lo <= ratio_limit;
    return table;
}

struct ConvergenceTable {
    std::vector<int> k_max;
    std::vector<int> m;
    std::vector<double> checkpoints;
    /// values[i][c] = g for truncation i at checkpoint c.
    std::vector<std::vector<double>> values;
    /// diffs[i][c] = |values[i+1][c] - values[i][c]|.
    std::vector<std::vector<double>> diffs;
};

/// Cauchy differences of g between successive nested truncations.
inline ConvergenceTable convergence_study(const RefinementScenario& scenario,
                                          const std::vector<int>& k_max_list,
                                          const std::vector<double>& checkpoints) {
    if (k_max_list.size() < 2)
        throw ValidationError("convergence_study: need >= 2 truncations");
    for (std::size_t i = 0; i + 1 < k_max_list.size(); ++i)
        if (!(k_max_list[i] < k_max_list[i + 1]))
            throw ValidationError(
                "convergence_study: k_max list must be ascending (nested)");
    if (checkpoints.empty())
        throw ValidationError("convergence_study: no checkpoints");

    const auto largest = build_basis(k_max_list.back());
    const auto master = detail::master_coefficients(scenario, largest);

    ConvergenceTable table;
    table.checkpoints = checkpoints;
    for (int k_max : k_max_list) {
        const auto basis = build_basis(k_max);
        const auto result = detail::run_truncation(scenario, basis, master);
        std::vector<double> row;
        for (double cp : checkpoints) {
            const TraceRow* best = nullptr;
            for (const TraceRow& r : result.trace.rows) {
                if (!best || std::abs(r.t - cp) < std::abs(best->t - cp)) best = &r;
            }
            // checkpoints must be members of the sample grid, not snapped
            if (!best ||
                std::abs(best->t - cp) > 1e-9 * std::max(1.0, std::abs(cp)))
                throw ValidationError(
                    "convergence_study: checkpoint t=" + std::to_string(cp) +
                    " not on the sample grid");
            row.push_back(best->g);
        }
        table.k_max.push_back(k_max);
        table.m.push_back(basis->m());
        table.values.push_back(std::move(row));
    }
    for (std::size_t i = 0; i + 1 < table.values.size(); ++i) {
        std::vector<double> d;
        for (std::size_t c = 0; c < checkpoints.size(); ++c)
            d.push_back(std::abs(table.values[i + 1][c] - table.values[i][c]));
        table.diffs.push_back(std::move(d));
    }
    return table;
}

}  // namespace nsdecay

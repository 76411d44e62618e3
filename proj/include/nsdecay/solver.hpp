/// Time integration of the truncated ODE system
///     c_j' = -nu lambda_j c_j - N_j(c) + b(t) w_j,
/// with the two 4th-order schemes:
///   rk4     classical Runge-Kutta, guarded by the linear stability bound
///           dt <= 2.8 / (nu lambda_max);
///   if_rk4  integrating-factor RK4: the stiff diagonal -nu lambda_j c_j is
///           propagated exactly by exponentials and RK4 steps only the
///           transformed nonlinear part (exact for pure linear decay).
///
/// The running integrals int_0^t G ds and int_0^t (f,v) ds are carried as
/// two extra quadrature components of the same Runge-Kutta step, so the
/// sampled energy-balance residual
///     g(t) + 2 nu int G - g(0) - 2 int (f,v)
/// converges at the full 4th order of the scheme.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nsdecay/basis.hpp"
#include "nsdecay/bounds.hpp"
#include "nsdecay/errors.hpp"
#include "nsdecay/forcing.hpp"
#include "nsdecay/interaction.hpp"

namespace nsdecay {

enum class Scheme { Rk4, IfRk4 };

inline std::string scheme_name(Scheme s) {
    return s == Scheme::Rk4 ? "rk4" : "if_rk4";
}

struct SolverParams {
    double nu = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;
    Scheme scheme = Scheme::IfRk4;
    int sample_every = 1;
    BoundVariant bound_variant = BoundVariant::Sharp;

    void validate() const {
        if (!(nu > 0.0)) throw ValidationError("SolverParams: nu must be > 0");
        if (!(dt > 0.0)) throw ValidationError("SolverParams: dt must be > 0");
        if (!(t_end >= dt))
            throw ValidationError("SolverParams: t_end must be >= dt");
        if (sample_every < 1)
            throw ValidationError("SolverParams: sample_every must be >= 1");
    }
};

/// g = |v|^2 = sum c_j^2 and G = ||v||^2 = sum lambda_j c_j^2.
inline std::pair<double, double> energy(const CoefficientState& state) {
    const Basis& basis = *state.basis;
    if (static_cast<int>(state.c.size()) != basis.m())
        throw ValidationError("energy: coefficient length mismatch");
    double g = 0.0, G = 0.0;
    for (int j = 0; j < basis.m(); ++j) {
        const double cj2 = state.c[j] * state.c[j];
        g += cj2;
        G += basis.modes[j].lambda * cj2;
    }
    return {g, G};
}

/// Largest stable step of classical RK4 for the linear part.
inline double rk4_stability_limit(double nu, const Basis& basis) {
    return 2.8 / (nu * basis.lambda_max);
}

/// Right-hand side c' = -nu Lambda c - N(c) + b(t) w.
inline std::vector<double> rhs(const CoefficientState& state,
                               const InteractionTensor& tensor,
                               const ForcingProfile& forcing,
                               const SolverParams& params) {
    params.validate();
    const Basis& basis = *state.basis;
    if (static_cast<int>(state.c.size()) != basis.m() || tensor.m != basis.m() ||
        static_cast<int>(forcing.weights.size()) != basis.m())
        throw ValidationError("rhs: dimension mismatch");
    std::vector<double> out = apply_nonlinearity(tensor, state.c);
    const double b = forcing.envelope(state.t);
    for (int j = 0; j < basis.m(); ++j) {
        out[j] = -params.nu * basis.modes[j].lambda * state.c[j] - out[j] +
                 b * forcing.weights[j];
    }
    return out;
}

struct TraceRow {
    double t = 0.0;
    double g = 0.0;
    double G = 0.0;
    double b = 0.0;
    double energy_residual = 0.0;
    double bound_sqrt_g = 0.0;
    double bound_g = 0.0;
    // Internal companions (not part of the CSV schema).
    double fv = 0.0;     // (f(t), v(t))
    double int_G = 0.0;  // int_{t_start}^{t} G ds, stage-consistent
    double int_fv = 0.0; // int_{t_start}^{t} (f,v) ds
};

struct EnergyTrace {
    std::vector<TraceRow> rows;
    std::string basis_id;
    std::string forcing_id;
    SolverParams params;
    double gamma = 0.0;   // nu * lambda_1
    double g_start = 0.0; // g at the first row (bound anchor)
    double t_start = 0.0;
};

struct IntegrationResult {
    EnergyTrace trace;
    CoefficientState final_state;
    /// Coefficient snapshots aligned with trace rows (only when requested).
    std::vector<std::vector<double>> states;
};

namespace detail {

/// One augmented step: y = [c, qG, qF]. The function nl(t, y, out) writes
/// the non-stiff part: -N(c)+b w on the c block, G(c) and (f,v) on the tail.
class AugmentedSystem {
  public:
    AugmentedSystem(const Basis& basis, const InteractionTensor& tensor,
                    const ForcingProfile& forcing, double nu)
        : basis_(basis), tensor_(tensor), forcing_(forcing), nu_(nu) {}

    int dim() const { return basis_.m() + 2; }

    void nonstiff(double t, const std::vector<double>& y,
                  std::vector<double>& out) const {
        const int m = basis_.m();
        double G = 0.0, wc = 0.0;
        for (int j = 0; j < m; ++j) {
            G += basis_.modes[j].lambda * y[j] * y[j];
            wc += forcing_.weights[j] * y[j];
        }
        const double b = forcing_.envelope(t);
        for (int j = 0; j < m; ++j) out[j] = 0.0;
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (const TensorEntry& e : tensor_.by_j[j])
                acc += e.value * y[e.p] * y[e.q];
            out[j] = -acc + b * forcing_.weights[j];
        }
        out[m] = G;
        out[m + 1] = b * wc;
    }

    void full_rhs(double t, const std::vector<double>& y,
                  std::vector<double>& out) const {
        nonstiff(t, y, out);
        for (int j = 0; j < basis_.m(); ++j)
            out[j] -= nu_ * basis_.modes[j].lambda * y[j];
    }

  private:
    const Basis& basis_;
    const InteractionTensor& tensor_;
    const ForcingProfile& forcing_;
    double nu_;
};

}  // namespace detail

/// Integrate from the given state to params.t_end (absolute time). t_end
/// minus the start time must be an integer number of steps, so that split
/// and straight-through runs share identical step boundaries.
///
/// row_sink, when set, receives every emitted row as integration goes; on
/// blow-up the rows seen so far form the partial trace.
inline IntegrationResult integrate(
    const CoefficientState& initial, const InteractionTensor& tensor,
    const ForcingProfile& forcing, const SolverParams& params,
    bool record_states = false,
    const std::function<void(const TraceRow&)>& row_sink = nullptr) {
    params.validate();
    const Basis& basis = *initial.basis;
    const int m = basis.m();
    if (static_cast<int>(initial.c.size()) != m || tensor.m != m ||
        static_cast<int>(forcing.weights.size()) != m)
        throw ValidationError("integrate: dimension mismatch");

    const double span = params.t_end - initial.t;
    if (!(span > 0.0))
        throw ValidationError("integrate: t_end must exceed the state time");
    const double steps_real = span / params.dt;
    const long long n_steps = std::llround(steps_real);
    if (n_steps < 1 || std::abs(steps_real - static_cast<double>(n_steps)) >
                           1e-9 * std::max(1.0, steps_real))
        throw ValidationError(
            "integrate: (t_end - t0) must be an integer multiple of dt");

    if (params.scheme == Scheme::Rk4) {
        const double limit = rk4_stability_limit(params.nu, basis);
        if (params.dt > limit)
            throw ValidationError(
                "integrate: rk4 stability violated, dt must be <= 2.8/(nu*lambda_max) = " +
                std::to_string(limit));
    }

    detail::AugmentedSystem system(basis, tensor, forcing, params.nu);
    const int dim = system.dim();
    std::vector<double> y(dim, 0.0), k1(dim), k2(dim), k3(dim), k4(dim),
        stage(dim);
    std::copy(initial.c.begin(), initial.c.end(), y.begin());

    // Integrating factors (identity on the two quadrature components).
    std::vector<double> e_half(dim, 1.0), e_full(dim, 1.0);
    if (params.scheme == Scheme::IfRk4) {
        for (int j = 0; j < m; ++j) {
            e_half[j] = std::exp(-params.nu * basis.modes[j].lambda * params.dt / 2.0);
            e_full[j] = e_half[j] * e_half[j];
        }
    }

    IntegrationResult result;
    EnergyTrace& trace = result.trace;
    trace.basis_id = basis.id();
    trace.forcing_id = forcing.envelope.describe();
    trace.params = params;
    trace.gamma = params.nu * basis.lambda_min;
    trace.t_start = initial.t;

    BoundSpec bound_spec;
    bound_spec.gamma = trace.gamma;
    bound_spec.envelope = forcing.envelope;
    bound_spec.variant = params.bound_variant;

    double g_start = 0.0;
    {
        double g0 = 0.0;
        for (int j = 0; j < m; ++j) g0 += y[j] * y[j];
        g_start = g0;
    }
    trace.g_start = g_start;
    bound_spec.g0 = g_start;

    auto emit = [&](double t, long long /*step*/) {
        TraceRow row;
        row.t = t;
        double g = 0.0, G = 0.0, wc = 0.0;
        for (int j = 0; j < m; ++j) {
            g += y[j] * y[j];
            G += basis.modes[j].lambda * y[j] * y[j];
            wc += forcing.weights[j] * y[j];
        }
        row.g = g;
        row.G = G;
        row.b = forcing.envelope(t);
        row.fv = row.b * wc;
        row.int_G = y[m];
        row.int_fv = y[m + 1];
        row.energy_residual =
            g + 2.0 * params.nu * row.int_G - g_start - 2.0 * row.int_fv;
        row.bound_sqrt_g = bound_sqrt_g(bound_spec, t, trace.t_start);
        row.bound_g = bound_g(bound_spec, t, trace.t_start);
        trace.rows.push_back(row);
        if (record_states)
            result.states.emplace_back(y.begin(), y.begin() + m);
        if (row_sink) row_sink(row);
    };

    emit(initial.t, 0);

    double t = initial.t;
    for (long long step = 0; step < n_steps; ++step) {
        const double dt = params.dt;
        t = initial.t + static_cast<double>(step) * dt;
        if (params.scheme == Scheme::Rk4) {
            system.full_rhs(t, y, k1);
            for (int i = 0; i < dim; ++i) stage[i] = y[i] + 0.5 * dt * k1[i];
            system.full_rhs(t + 0.5 * dt, stage, k2);
            for (int i = 0; i < dim; ++i) stage[i] = y[i] + 0.5 * dt * k2[i];
            system.full_rhs(t + 0.5 * dt, stage, k3);
            for (int i = 0; i < dim; ++i) stage[i] = y[i] + dt * k3[i];
            system.full_rhs(t + dt, stage, k4);
            for (int i = 0; i < dim; ++i)
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        } else {
            // Integrating-factor RK4 (Kassam-Trefethen form).
            system.nonstiff(t, y, k1);
            for (int i = 0; i < dim; ++i)
                stage[i] = e_half[i] * (y[i] + 0.5 * dt * k1[i]);
            system.nonstiff(t + 0.5 * dt, stage, k2);
            for (int i = 0; i < dim; ++i)
                stage[i] = e_half[i] * y[i] + 0.5 * dt * k2[i];
            system.nonstiff(t + 0.5 * dt, stage, k3);
            for (int i = 0; i < dim; ++i)
                stage[i] = e_full[i] * y[i] + dt * e_half[i] * k3[i];
            system.nonstiff(t + dt, stage, k4);
            for (int i = 0; i < dim; ++i)
                y[i] = e_full[i] * y[i] +
                       dt / 6.0 *
                           (e_full[i] * k1[i] +
                            2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i]);
        }
        t = initial.t + static_cast<double>(step + 1) * dt;

        double g = 0.0;
        bool finite = true;
        for (int j = 0; j < m; ++j) {
            g += y[j] * y[j];
            if (!std::isfinite(y[j])) finite = false;
        }
        if (!finite || !(g < 1e250)) {
            throw BlowupError(t, "integrate: solution blew up at t=" +
                                     std::to_string(t));
        }
        if ((step + 1) % params.sample_every == 0 || step + 1 == n_steps)
            emit(t, step + 1);
    }

    result.final_state.t = t;
    result.final_state.c.assign(y.begin(), y.begin() + m);
    result.final_state.basis = initial.basis;
    return result;
}

/// Max over sampled rows of the energy-balance defect
///     |g(t) + 2 nu int_0^t G ds - g(0) - 2 int_0^t (f,v) ds|
/// with the integrals carried at the integrator's own order. The forcing
/// argument cross-checks that the trace's b column matches the envelope.
inline double energy_balance_residual(const EnergyTrace& trace,
                                      const ForcingProfile& forcing,
                                      const SolverParams& params) {
    if (trace.rows.size() < 2)
        throw ValidationError("energy_balance_residual: need >= 2 trace rows");
    (void)params;
    double worst = 0.0;
    for (const TraceRow& row : trace.rows) {
        const double b = forcing.envelope(row.t);
        if (std::abs(b - row.b) > 1e-12 * (1.0 + std::abs(b)))
            throw ValidationError(
                "energy_balance_residual: trace b column does not match envelope");
        worst = std::max(worst, std::abs(row.energy_residual));
    }
    return worst;
}

}  // namespace nsdecay

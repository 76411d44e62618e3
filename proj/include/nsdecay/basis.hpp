/// Orthonormal divergence-free eigenbasis of the Stokes operator on the
/// mean-zero periodic torus [0,2pi)^3.
///
/// Each basis element is a real trigonometric field
///     phi(x) = n0 * e(k) * {cos|sin}(k.x),
/// with integer wavevector k != 0 (one canonical representative per +-k
/// pair), a unit polarization vector e(k) orthogonal to k (two choices),
/// and n0 = sqrt(2/V) so that |phi|_{L2} = 1. Divergence-freeness is
/// e(k).k = 0 by construction; the Stokes eigenvalue is |k|^2.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "nsdecay/errors.hpp"
#include "nsdecay/rng.hpp"

namespace nsdecay {

inline constexpr double kTwoPi = 6.283185307179586476925287;
/// Volume of the periodic box [0,2pi)^3.
inline constexpr double kBoxVolume = kTwoPi * kTwoPi * kTwoPi;

struct Vec3i {
    int x = 0, y = 0, z = 0;
    int norm2() const { return x * x + y * y + z * z; }
    bool operator==(const Vec3i&) const = default;
};

inline Vec3i operator+(Vec3i a, Vec3i b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3i operator-(Vec3i a, Vec3i b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3i operator-(Vec3i a) { return {-a.x, -a.y, -a.z}; }

inline bool lex_less(Vec3i a, Vec3i b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
}

struct Vec3d {
    double x = 0.0, y = 0.0, z = 0.0;
    bool operator==(const Vec3d&) const = default;
};

inline Vec3d cross(Vec3d a, Vec3d b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double dot(Vec3d a, Vec3d b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double dot(Vec3d a, Vec3i b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3d a) { return std::sqrt(dot(a, a)); }
inline Vec3d normalized(Vec3d a) {
    const double n = norm(a);
    return {a.x / n, a.y / n, a.z / n};
}

/// Canonical half-lattice representative: first nonzero component positive.
inline bool is_canonical(Vec3i k) {
    if (k.x != 0) return k.x > 0;
    if (k.y != 0) return k.y > 0;
    return k.z > 0;
}
inline Vec3i canonicalize(Vec3i k) { return is_canonical(k) ? k : -k; }

enum class Parity { Cosine, Sine };

/// Polarization pair for a wavevector: e1 = normalize(k x a) with a the
/// first standard basis vector not parallel to k, e2 = normalize(k x e1).
inline std::array<Vec3d, 2> polarization_vectors(Vec3i k) {
    Vec3d kd{static_cast<double>(k.x), static_cast<double>(k.y),
             static_cast<double>(k.z)};
    Vec3d a{1.0, 0.0, 0.0};
    if (k.y == 0 && k.z == 0) a = Vec3d{0.0, 1.0, 0.0};
    const Vec3d e1 = normalized(cross(kd, a));
    const Vec3d e2 = normalized(cross(kd, e1));
    return {e1, e2};
}

struct Mode {
    Vec3i k;
    int polarization = 1;  // 1 or 2
    Parity parity = Parity::Cosine;
    double lambda = 0.0;  // |k|^2
    Vec3d e;              // realized unit polarization vector

    bool operator==(const Mode&) const = default;

    /// L2 normalization shared by all modes: integral of cos^2(k.x) is V/2.
    static double norm_const() {
        static const double n0 = std::sqrt(2.0 / kBoxVolume);
        return n0;
    }

    double phase(double x, double y, double z) const {
        return k.x * x + k.y * y + k.z * z;
    }
    double trig(double arg) const {
        return parity == Parity::Cosine ? std::cos(arg) : std::sin(arg);
    }
    /// d/d(arg) of the trig factor.
    double dtrig(double arg) const {
        return parity == Parity::Cosine ? -std::sin(arg) : std::cos(arg);
    }
};

struct Basis {
    std::vector<Mode> modes;
    int k_max = 0;      // shell radius; modes satisfy |k|^2 <= shell_max
    int shell_max = 0;  // max |k|^2
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    int m() const { return static_cast<int>(modes.size()); }

    std::string id() const {
        return "torus3:shell=" + std::to_string(shell_max) + ":v1";
    }

    /// First mode index for a canonical wavevector, or -1.
    int first_mode_of(Vec3i k) const {
        auto it = by_wavevector_.find(pack(k));
        return it == by_wavevector_.end() ? -1 : it->second;
    }
    static std::int64_t pack(Vec3i k) {
        const std::int64_t base = 64;
        return (static_cast<std::int64_t>(k.x) + 32) * base * base +
               (static_cast<std::int64_t>(k.y) + 32) * base +
               (static_cast<std::int64_t>(k.z) + 32);
    }

    std::unordered_map<std::int64_t, int> by_wavevector_;
};

/// All modes with |k|^2 <= shell_max, canonically ordered.
inline std::shared_ptr<const Basis> build_basis_shell(int shell_max) {
    if (shell_max < 1) {
        throw ValidationError("build_basis: shell must be >= 1");
    }
    auto basis = std::make_shared<Basis>();
    basis->shell_max = shell_max;
    // Largest per-axis frequency; also the alias bound used by grid checks.
    int reach = static_cast<int>(std::floor(std::sqrt(double(shell_max))));
    while (reach * reach > shell_max) --reach;
    while ((reach + 1) * (reach + 1) <= shell_max) ++reach;
    basis->k_max = reach;
    for (int i = -reach; i <= reach; ++i) {
        for (int j = -reach; j <= reach; ++j) {
            for (int l = -reach; l <= reach; ++l) {
                Vec3i k{i, j, l};
                if (k == Vec3i{0, 0, 0}) continue;
                if (!is_canonical(k)) continue;
                if (k.norm2() > shell_max) continue;
                const auto pol = polarization_vectors(k);
                for (int p = 1; p <= 2; ++p) {
                    for (Parity parity : {Parity::Cosine, Parity::Sine}) {
                        Mode mode;
                        mode.k = k;
                        mode.polarization = p;
                        mode.parity = parity;
                        mode.lambda = static_cast<double>(k.norm2());
                        mode.e = pol[p - 1];
                        basis->modes.push_back(mode);
                    }
                }
            }
        }
    }
    std::sort(basis->modes.begin(), basis->modes.end(),
              [](const Mode& a, const Mode& b) {
                  if (a.lambda != b.lambda) return a.lambda < b.lambda;
                  if (!(a.k == b.k)) return lex_less(a.k, b.k);
                  if (a.polarization != b.polarization)
                      return a.polarization < b.polarization;
                  return a.parity == Parity::Cosine && b.parity == Parity::Sine;
              });
    basis->lambda_min = basis->modes.front().lambda;
    basis->lambda_max = basis->modes.back().lambda;
    for (int idx = 0; idx < basis->m(); ++idx) {
        const Vec3i k = basis->modes[idx].k;
        basis->by_wavevector_.try_emplace(Basis::pack(k), idx);
    }
    return basis;
}

/// Modes with |k|^2 <= k_max^2 (nested spherical truncations).
inline std::shared_ptr<const Basis> build_basis(int k_max) {
    if (k_max < 1) throw ValidationError("build_basis: k_max must be >= 1");
    return build_basis_shell(k_max * k_max);
}

/// Galerkin coefficient state: v(t) = sum_j c_j(t) phi_j.
struct CoefficientState {
    double t = 0.0;
    std::vector<double> c;
    std::shared_ptr<const Basis> basis;
};

/// Uniform grid point coordinate: x_i = 2pi i / n.
inline double grid_coord(int i, int n) {
    return kTwoPi * static_cast<double>(i) / static_cast<double>(n);
}

/// Point samples of the velocity field on a uniform grid_n^3 grid,
/// flattened as ((ix * grid_n) + iy) * grid_n + iz.
inline std::vector<Vec3d> evaluate_field(const CoefficientState& state,
                                         int grid_n) {
    const Basis& basis = *state.basis;
    if (grid_n < 2 * basis.k_max + 1) {
        throw AliasingError(
            "evaluate_field: grid_n must be >= 2*k_max+1, got " +
            std::to_string(grid_n));
    }
    if (static_cast<int>(state.c.size()) != basis.m()) {
        throw ValidationError("evaluate_field: coefficient length mismatch");
    }
    std::vector<Vec3d> field(static_cast<std::size_t>(grid_n) * grid_n * grid_n);
    const double n0 = Mode::norm_const();
    for (int j = 0; j < basis.m(); ++j) {
        const double cj = state.c[j];
        if (cj == 0.0) continue;
        const Mode& mode = basis.modes[j];
        const double ax = cj * n0 * mode.e.x;
        const double ay = cj * n0 * mode.e.y;
        const double az = cj * n0 * mode.e.z;
        std::size_t idx = 0;
        for (int ix = 0; ix < grid_n; ++ix) {
            const double px = mode.k.x * grid_coord(ix, grid_n);
            for (int iy = 0; iy < grid_n; ++iy) {
                const double pxy = px + mode.k.y * grid_coord(iy, grid_n);
                for (int iz = 0; iz < grid_n; ++iz, ++idx) {
                    const double trig =
                        mode.trig(pxy + mode.k.z * grid_coord(iz, grid_n));
                    field[idx].x += ax * trig;
                    field[idx].y += ay * trig;
                    field[idx].z += az * trig;
                }
            }
        }
    }
    return field;
}

/// Divergence samples from the spectral representation. The factor e.k is
/// kept as the numerically computed dot product, so this checks that the
/// realized polarization vectors are orthogonal to their wavevectors.
inline std::vector<double> evaluate_divergence(const CoefficientState& state,
                                               int grid_n) {
    const Basis& basis = *state.basis;
    if (grid_n < 2 * basis.k_max + 1) {
        throw AliasingError(
            "evaluate_divergence: grid_n must be >= 2*k_max+1");
    }
    std::vector<double> div(static_cast<std::size_t>(grid_n) * grid_n * grid_n,
                            0.0);
    const double n0 = Mode::norm_const();
    for (int j = 0; j < basis.m(); ++j) {
        const double cj = state.c[j];
        if (cj == 0.0) continue;
        const Mode& mode = basis.modes[j];
        const double ek = dot(mode.e, mode.k);  // 0 up to roundoff
        const double amp = cj * n0 * ek;
        std::size_t idx = 0;
        for (int ix = 0; ix < grid_n; ++ix) {
            const double px = mode.k.x * grid_coord(ix, grid_n);
            for (int iy = 0; iy < grid_n; ++iy) {
                const double pxy = px + mode.k.y * grid_coord(iy, grid_n);
                for (int iz = 0; iz < grid_n; ++iz, ++idx) {
                    div[idx] +=
                        amp * mode.dtrig(pxy + mode.k.z * grid_coord(iz, grid_n));
                }
            }
        }
    }
    return div;
}

/// Seeded random initial spectrum: per-mode energy ~ lambda^{-decay_exponent},
/// rescaled so the total energy matches exactly.
struct SpectrumSpec {
    double energy = 1.0;
    double decay_exponent = 0.0;
    std::uint64_t seed = 0;
};

/// Initial state from an explicit coefficient list (length <= m; the tail
/// is zero-filled). A longer list is rejected, never silently truncated.
inline CoefficientState project_initial(const std::vector<double>& coeffs,
                                        std::shared_ptr<const Basis> basis) {
    if (static_cast<int>(coeffs.size()) > basis->m()) {
        throw TruncationError(
            "project_initial: " + std::to_string(coeffs.size()) +
            " coefficients exceed truncation m=" + std::to_string(basis->m()));
    }
    CoefficientState state;
    state.t = 0.0;
    state.c.assign(basis->m(), 0.0);
    std::copy(coeffs.begin(), coeffs.end(), state.c.begin());
    state.basis = std::move(basis);
    return state;
}

inline CoefficientState project_initial(const SpectrumSpec& spec,
                                        std::shared_ptr<const Basis> basis) {
    if (spec.energy < 0.0) {
        throw ValidationError("project_initial: energy must be >= 0");
    }
    CoefficientState state;
    state.t = 0.0;
    state.c.assign(basis->m(), 0.0);
    state.basis = basis;
    if (spec.energy == 0.0) return state;

    Rng rng(spec.seed);
    double total = 0.0;
    for (int j = 0; j < basis->m(); ++j) {
        const double sigma =
            std::pow(basis->modes[j].lambda, -0.5 * spec.decay_exponent);
        state.c[j] = sigma * rng.gaussian();
        total += state.c[j] * state.c[j];
    }
    if (total == 0.0) {
        throw ValidationError("project_initial: degenerate random draw");
    }
    const double scale = std::sqrt(spec.energy / total);
    for (double& cj : state.c) cj *= scale;
    return state;
}

}  // namespace nsdecay

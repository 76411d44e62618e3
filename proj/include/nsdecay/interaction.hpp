/// Galerkin triad coefficients of the convective term,
///     T_pqj = ((phi_p . grad) phi_q, phi_j),
/// assembled by uniform-grid quadrature that is exact for the product of
/// three trigonometric modes (per-axis frequency <= 3*k_max < grid_n).
///
/// With phi = n0 e trig(k.x) the integrand factorizes:
///     (phi_p . grad) phi_q . phi_j
///       = n0^3 (e_p . k_q)(e_q . e_j) trig_p(k_p.x) trig_q'(k_q.x) trig_j(k_j.x),
/// so the only candidate output wavevectors for a pair (p, q) are the
/// canonical representatives of k_p + k_q and k_p - k_q. Entries are
/// assembled independently for every (p,q,j), which makes the discrete
/// skew symmetry T_pqj = -T_pjq a genuine check of the quadrature rather
/// than a construction artifact.
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "nsdecay/basis.hpp"
#include "nsdecay/errors.hpp"

namespace nsdecay {

inline constexpr int kTensorFormatVersion = 1;
/// Entries below this magnitude are roundoff of exact zeros and dropped.
inline constexpr double kTensorDropThreshold = 1e-14;

struct TensorEntry {
    int p;
    int q;
    double value;
};

struct InteractionTensor {
    int m = 0;
    int k_max = 0;
    int shell_max = 0;
    int quadrature_grid_n = 0;
    /// Entries grouped by output index j, ordered by (p, q).
    std::vector<std::vector<TensorEntry>> by_j;

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& row : by_j) n += row.size();
        return n;
    }

    /// Stored value of T_pqj (0 for dropped/absent triples).
    double value_of(int p, int q, int j) const {
        auto it = lookup_.find(key(p, q, j));
        return it == lookup_.end() ? 0.0 : it->second;
    }

    std::int64_t key(int p, int q, int j) const {
        return (static_cast<std::int64_t>(p) * m + q) * m + j;
    }

    std::unordered_map<std::int64_t, double> lookup_;
};

namespace detail {

/// cos(k.x) and sin(k.x) sampled on the uniform grid for one wavevector.
struct TrigGrids {
    std::vector<double> cos_vals;
    std::vector<double> sin_vals;
};

inline TrigGrids sample_trig(Vec3i k, int grid_n) {
    TrigGrids out;
    const std::size_t total = static_cast<std::size_t>(grid_n) * grid_n * grid_n;
    out.cos_vals.resize(total);
    out.sin_vals.resize(total);
    std::size_t idx = 0;
    for (int ix = 0; ix < grid_n; ++ix) {
        const double px = k.x * grid_coord(ix, grid_n);
        for (int iy = 0; iy < grid_n; ++iy) {
            const double pxy = px + k.y * grid_coord(iy, grid_n);
            for (int iz = 0; iz < grid_n; ++iz, ++idx) {
                const double arg = pxy + k.z * grid_coord(iz, grid_n);
                out.cos_vals[idx] = std::cos(arg);
                out.sin_vals[idx] = std::sin(arg);
            }
        }
    }
    return out;
}

}  // namespace detail

/// Assemble the triad tensor. grid_n defaults to 3*k_max+1, the smallest
/// grid on which the quadrature is exact; larger grids must agree to
/// roundoff (checked in tests).
inline InteractionTensor assemble_tensor(const Basis& basis, int grid_n = 0) {
    const int min_grid = 3 * basis.k_max + 1;
    if (grid_n == 0) grid_n = min_grid;
    if (grid_n < min_grid) {
        throw AliasingError("assemble_tensor: grid_n must be >= 3*k_max+1 = " +
                            std::to_string(min_grid));
    }
    const int m = basis.m();
    InteractionTensor tensor;
    tensor.m = m;
    tensor.k_max = basis.k_max;
    tensor.shell_max = basis.shell_max;
    tensor.quadrature_grid_n = grid_n;
    tensor.by_j.resize(m);

    // One cos/sin sample array per distinct canonical wavevector.
    std::unordered_map<std::int64_t, detail::TrigGrids> grids;
    for (const Mode& mode : basis.modes) {
        const std::int64_t key = Basis::pack(mode.k);
        if (!grids.count(key)) grids.emplace(key, detail::sample_trig(mode.k, grid_n));
    }

    const std::size_t total = static_cast<std::size_t>(grid_n) * grid_n * grid_n;
    const double cell_weight = kBoxVolume / static_cast<double>(total);
    const double n0 = Mode::norm_const();
    const double scale = n0 * n0 * n0 * cell_weight;

    std::vector<double> pair_product(total);
    for (int p = 0; p < m; ++p) {
        const Mode& mp = basis.modes[p];
        const auto& trig_p = grids.at(Basis::pack(mp.k));
        const std::vector<double>& arr_p =
            mp.parity == Parity::Cosine ? trig_p.cos_vals : trig_p.sin_vals;
        for (int q = 0; q < m; ++q) {
            const Mode& mq = basis.modes[q];
            const double advect = dot(mp.e, mq.k);  // e_p . k_q
            if (advect == 0.0) continue;

            // trig_q' : cosine -> -sin, sine -> +cos.
            const auto& trig_q = grids.at(Basis::pack(mq.k));
            const std::vector<double>& arr_dq =
                mq.parity == Parity::Cosine ? trig_q.sin_vals : trig_q.cos_vals;
            const double dq_sign = mq.parity == Parity::Cosine ? -1.0 : 1.0;
            for (std::size_t i = 0; i < total; ++i)
                pair_product[i] = arr_p[i] * arr_dq[i];

            // Triad selection: only k_p + k_q and k_p - k_q can close.
            Vec3i cands[2] = {mp.k + mq.k, mp.k - mq.k};
            for (Vec3i w : cands) {
                if (w == Vec3i{0, 0, 0}) continue;
                w = canonicalize(w);
                const int j0 = basis.first_mode_of(w);
                if (j0 < 0) continue;
                for (int j = j0; j < j0 + 4; ++j) {
                    const Mode& mj = basis.modes[j];
                    const double pol = dot(mq.e, mj.e);  // e_q . e_j
                    if (pol == 0.0) continue;
                    const auto& trig_j = grids.at(Basis::pack(mj.k));
                    const std::vector<double>& arr_j = mj.parity == Parity::Cosine
                                                           ? trig_j.cos_vals
                                                           : trig_j.sin_vals;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < total; ++i)
                        acc += pair_product[i] * arr_j[i];
                    const double value = scale * advect * dq_sign * pol * acc;
                    if (std::abs(value) < kTensorDropThreshold) continue;
                    tensor.by_j[j].push_back({p, q, value});
                    tensor.lookup_.emplace(tensor.key(p, q, j), value);
                }
            }
        }
    }
    return tensor;
}

/// N_j(c) = sum_{p,q} T_pqj c_p c_q, the Galerkin-tested convective term.
inline std::vector<double> apply_nonlinearity(const InteractionTensor& tensor,
                                              const std::vector<double>& c) {
    if (static_cast<int>(c.size()) != tensor.m) {
        throw ValidationError("apply_nonlinearity: coefficient length " +
                              std::to_string(c.size()) + " != m = " +
                              std::to_string(tensor.m));
    }
    std::vector<double> out(tensor.m, 0.0);
    for (int j = 0; j < tensor.m; ++j) {
        double acc = 0.0;
        for (const TensorEntry& e : tensor.by_j[j])
            acc += e.value * c[e.p] * c[e.q];
        out[j] = acc;
    }
    return out;
}

}  // namespace nsdecay

/// Adaptive Gauss-Kronrod (G7/K15) quadrature with absolute tolerance.
/// Integrands with known kinks (cutoff forcings, table envelopes) are
/// split at their breakpoints first, so each panel sees a smooth function
/// and the rule converges at spectral speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nsdecay/errors.hpp"

namespace nsdecay {

namespace detail {

// 15-point Kronrod nodes and weights on [-1,1] plus the embedded
// 7-point Gauss weights (QUADPACK dqk15 constants).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value;
    double error;
};

template <typename F>
PanelResult gauss_kronrod_panel(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double offset = half * kKronrodNodes[i];
        double fsum;
        if (i == 7) {
            fsum = f(mid);
        } else {
            fsum = f(mid - offset) + f(mid + offset);
        }
        kronrod += kKronrodWeights[i] * fsum;
        if (i % 2 == 1) {
            gauss += kGaussWeights[i / 2] * fsum;
        } else if (i == 7) {
            gauss += kGaussWeights[3] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrate f over [a, b] to absolute tolerance abs_tol.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol) {
    if (!(b >= a)) throw ValidationError("integrate_adaptive: b < a");
    if (a == b) return 0.0;

    struct Interval {
        double a, b, value, error;
    };
    auto first = detail::gauss_kronrod_panel(f, a, b);
    std::vector<Interval> heap{{a, b, first.value, first.error}};
    auto by_error = [](const Interval& x, const Interval& y) {
        return x.error < y.error;
    };

    double total_value = first.value;
    double total_error = first.error;
    const int max_panels = 4000;
    while (total_error > abs_tol && static_cast<int>(heap.size()) < max_panels) {
        std::pop_heap(heap.begin(), heap.end(), by_error);
        Interval worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval at floating-point resolution; keep its estimate.
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;
        }
        auto left = detail::gauss_kronrod_panel(f, worst.a, mid);
        auto right = detail::gauss_kronrod_panel(f, mid, worst.b);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push_back({worst.a, mid, left.value, left.error});
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back({mid, worst.b, right.value, right.error});
        std::push_heap(heap.begin(), heap.end(), by_error);
    }
    if (total_error > 1e6 * abs_tol) {
        throw ValidationError("integrate_adaptive: failed to reach tolerance");
    }
    return total_value;
}

/// Same, but split first at the given breakpoints (clipped to (a, b)).
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol,
                          const std::vector<double>& breakpoints) {
    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    const double local_tol = abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        sum += integrate_adaptive(f, cuts[i], cuts[i + 1], local_tol);
    }
    return sum;
}

}  // namespace nsdecay

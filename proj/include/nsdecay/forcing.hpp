/// Separable forcing f(t) = b(t) * w with a scalar envelope b >= 0 and a
/// fixed unit modal weight vector w, so that |f(t)| = b(t) exactly.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nsdecay/basis.hpp"
#include "nsdecay/errors.hpp"

namespace nsdecay {

enum class EnvelopeKind { Zero, Cutoff, Exponential, Polynomial, Table };

/// Scalar temporal envelope b(t), t >= 0. Families:
///   zero                 b = 0
///   cutoff(t0, A)        b = A for t <= t0, 0 afterwards
///   exponential(k, A)    b = A e^{-k t}
///   polynomial(a, A)     b = A (1+t)^{-a}
///   table                piecewise-linear samples on [t_first, t_last]
class Envelope {
  public:
    static Envelope zero() { return Envelope(EnvelopeKind::Zero); }

    static Envelope cutoff(double t0, double amplitude = 1.0) {
        if (t0 < 0.0) throw ValidationError("cutoff envelope: t0 must be >= 0");
        if (amplitude < 0.0)
            throw ValidationError("cutoff envelope: amplitude must be >= 0");
        Envelope e(EnvelopeKind::Cutoff);
        e.t0_ = t0;
        e.amplitude_ = amplitude;
        return e;
    }

    static Envelope exponential(double rate, double amplitude = 1.0) {
        if (rate <= 0.0)
            throw ValidationError("exponential envelope: rate must be > 0");
        if (amplitude < 0.0)
            throw ValidationError("exponential envelope: amplitude must be >= 0");
        Envelope e(EnvelopeKind::Exponential);
        e.rate_ = rate;
        e.amplitude_ = amplitude;
        return e;
    }

    static Envelope polynomial(double power, double amplitude = 1.0) {
        if (power < 0.0)
            throw ValidationError("polynomial envelope: power must be >= 0");
        if (amplitude < 0.0)
            throw ValidationError("polynomial envelope: amplitude must be >= 0");
        Envelope e(EnvelopeKind::Polynomial);
        e.power_ = power;
        e.amplitude_ = amplitude;
        return e;
    }

    static Envelope table(std::vector<double> times, std::vector<double> values) {
        if (times.size() < 2 || times.size() != values.size())
            throw ValidationError("table envelope: need >= 2 aligned samples");
        for (std::size_t i = 0; i + 1 < times.size(); ++i) {
            if (!(times[i] < times[i + 1]))
                throw ValidationError("table envelope: times must be ascending");
        }
        for (double v : values) {
            if (!(v >= 0.0))
                throw ValidationError("table envelope: values must be >= 0");
        }
        Envelope e(EnvelopeKind::Table);
        e.times_ = std::move(times);
        e.values_ = std::move(values);
        return e;
    }

    EnvelopeKind kind() const { return kind_; }
    double cutoff_time() const { return t0_; }
    double rate() const { return rate_; }
    double power() const { return power_; }
    double amplitude() const { return amplitude_; }

    bool evaluable_at(double t) const {
        if (t < 0.0) return false;
        if (kind_ == EnvelopeKind::Table)
            return t >= times_.front() && t <= times_.back();
        return true;
    }

    double operator()(double t) const {
        if (t < 0.0) throw ValidationError("envelope: t must be >= 0");
        switch (kind_) {
            case EnvelopeKind::Zero:
                return 0.0;
            case EnvelopeKind::Cutoff:
                return t <= t0_ ? amplitude_ : 0.0;
            case EnvelopeKind::Exponential:
                return amplitude_ * std::exp(-rate_ * t);
            case EnvelopeKind::Polynomial:
                return amplitude_ * std::pow(1.0 + t, -power_);
            case EnvelopeKind::Table: {
                if (!evaluable_at(t))
                    throw ValidationError(
                        "table envelope: t=" + std::to_string(t) +
                        " outside sampled range");
                auto hi = std::upper_bound(times_.begin(), times_.end(), t);
                if (hi == times_.end()) return values_.back();
                if (hi == times_.begin()) return values_.front();
                const std::size_t i = static_cast<std::size_t>(hi - times_.begin());
                const double w =
                    (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
                return values_[i - 1] + w * (values_[i] - values_[i - 1]);
            }
        }
        return 0.0;
    }

    /// Points where b is not smooth; quadrature and the extremal ODE split here.
    std::vector<double> breakpoints() const {
        switch (kind_) {
            case EnvelopeKind::Cutoff:
                return {t0_};
            case EnvelopeKind::Table:
                return times_;
            default:
                return {};
        }
    }

    std::string describe() const {
        switch (kind_) {
            case EnvelopeKind::Zero:
                return "zero";
            case EnvelopeKind::Cutoff:
                return "cutoff(t0=" + std::to_string(t0_) +
                       ",A=" + std::to_string(amplitude_) + ")";
            case EnvelopeKind::Exponential:
                return "exponential(k=" + std::to_string(rate_) +
                       ",A=" + std::to_string(amplitude_) + ")";
            case EnvelopeKind::Polynomial:
                return "polynomial(a=" + std::to_string(power_) +
                       ",A=" + std::to_string(amplitude_) + ")";
            case EnvelopeKind::Table:
                return "table(n=" + std::to_string(times_.size()) + ")";
        }
        return "?";
    }

  private:
    explicit Envelope(EnvelopeKind kind) : kind_(kind) {}

    EnvelopeKind kind_;
    double t0_ = 0.0;
    double rate_ = 0.0;
    double power_ = 0.0;
    double amplitude_ = 1.0;
    std::vector<double> times_, values_;
};

enum class WeightsRule { LowestShell, Uniform, FirstMode, Explicit };

struct ForcingProfile {
    Envelope envelope = Envelope::zero();
    std::vector<double> weights;  // unit Euclidean norm, length m

    /// (f(t), v) = b(t) * (w . c).
    double inner_with(double t, const std::vector<double>& c) const {
        const double b = envelope(t);
        if (b == 0.0) return 0.0;
        double s = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) s += weights[j] * c[j];
        return b * s;
    }
};

inline std::vector<double> make_weights(WeightsRule rule, const Basis& basis,
                                        const std::vector<double>& explicit_values = {}) {
    std::vector<double> w(basis.m(), 0.0);
    switch (rule) {
        case WeightsRule::LowestShell:
            for (int j = 0; j < basis.m(); ++j)
                if (basis.modes[j].lambda == basis.lambda_min) w[j] = 1.0;
            break;
        case WeightsRule::Uniform:
            std::fill(w.begin(), w.end(), 1.0);
            break;
        case WeightsRule::FirstMode:
            w[0] = 1.0;
            break;
        case WeightsRule::Explicit:
            if (static_cast<int>(explicit_values.size()) > basis.m())
                throw TruncationError(
                    "forcing weights: list exceeds truncation m");
            std::copy(explicit_values.begin(), explicit_values.end(), w.begin());
            break;
    }
    double norm2 = 0.0;
    for (double x : w) norm2 += x * x;
    if (norm2 == 0.0)
        throw ValidationError("forcing weights: zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : w) x *= inv;
    return w;
}

inline ForcingProfile make_forcing(Envelope envelope, WeightsRule rule,
                                   const Basis& basis,
                                   const std::vector<double>& explicit_values = {}) {
    return ForcingProfile{std::move(envelope),
                          make_weights(rule, basis, explicit_values)};
}

}  // namespace nsdecay

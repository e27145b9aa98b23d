#pragma once

#include <cmath>
#include <cstdint>

#include "darnn/core/error.hpp"
#include "darnn/core/mat.hpp"

namespace darnn {

/// Probabilities are clamped at kProbEps before any log; clamp events are
/// counted and surfaced in training logs instead of producing NaN.
inline constexpr double kProbEps = 1e-12;

struct AnticipationLossConfig {
    double decay_rate = 0.9;
};

/// Weight of the term `steps_from_end` positions before the final timestep:
/// exp(-decay * steps_from_end). The final timestep has weight exactly 1 and
/// weights grow by a factor exp(decay) per step toward the end.
inline double anticipation_weight(const AnticipationLossConfig& cfg, Index steps_from_end) {
    return std::exp(-cfg.decay_rate * static_cast<double>(steps_from_end));
}

template <class Real>
struct AnticipationLossResult {
    double loss = 0.0;
    Mat<Real> dlogits;  // T×J, gradient w.r.t. the softmax logits
    long clamp_events = 0;
};

/// Exponentially time-weighted cross entropy over a T×J probability
/// trajectory: sum_t -exp(-decay*(T-t)) * log(p_t[true]). The logit gradient
/// at row t is the weight times (p_t - onehot).
template <class Real>
inline AnticipationLossResult<Real> anticipation_loss(const Mat<Real>& probs, Index true_class,
                                                      const AnticipationLossConfig& cfg) {
    if (true_class >= probs.cols) {
        throw ShapeError("anticipation_loss: true_class " + std::to_string(true_class) +
                         " out of range for " + std::to_string(probs.cols) + " classes");
    }
    AnticipationLossResult<Real> r;
    const Index T = probs.rows;
    r.dlogits = Mat<Real>(T, probs.cols);
    for (Index t = 0; t < T; ++t) {
        const double w = anticipation_weight(cfg, T - 1 - t);
        double p = static_cast<double>(probs(t, true_class));
        if (p < kProbEps) {
            p = kProbEps;
            ++r.clamp_events;
        }
        r.loss += -w * std::log(p);
        for (Index j = 0; j < probs.cols; ++j) {
            const double onehot = j == true_class ? 1.0 : 0.0;
            r.dlogits(t, j) = static_cast<Real>(w * (static_cast<double>(probs(t, j)) - onehot));
        }
    }
    return r;
}

struct DomainLossResult {
    double loss = 0.0;
    double dlogit = 0.0;  // gradient w.r.t. the sigmoid pre-activation
    long clamp_events = 0;
};

/// Binomial cross-entropy on the domain probability (label: source=0,
/// target=1). dlogit is the clean sigmoid form p - label.
inline DomainLossResult domain_loss(double p, int domain_label) {
    DomainLossResult r;
    double pc = p;
    if (pc < kProbEps) {
        pc = kProbEps;
        ++r.clamp_events;
    }
    if (pc > 1.0 - kProbEps) {
        pc = 1.0 - kProbEps;
        ++r.clamp_events;
    }
    const double y = static_cast<double>(domain_label);
    r.loss = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    r.dlogit = p - y;
    return r;
}

/// Gradient reversal: identity forward, backward multiplies by -lambda.
template <class Real>
inline const Vec<Real>& gradient_reversal_forward(const Vec<Real>& x) {
    return x;
}

template <class Real>
inline Vec<Real> gradient_reversal_backward(const Vec<Real>& upstream, double lambda) {
    Vec<Real> out(upstream.size());
    for (Index i = 0; i < upstream.size(); ++i)
        out[i] = static_cast<Real>(-lambda) * upstream[i];
    return out;
}

/// Mean of per-sample losses over weight-1 samples; 0 when all weights are 0
/// (a domain-only step).
inline double apply_sample_mask(const std::vector<double>& losses,
                                const std::vector<int>& weights) {
    if (losses.size() != weights.size()) {
        throw ShapeError("apply_sample_mask: weights length " + std::to_string(weights.size()) +
                         " != batch size " + std::to_string(losses.size()));
    }
    double sum = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (weights[i] != 0) {
            sum += losses[i];
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Reported total: L_y - lambda * L_d. The minus sign is realized in the
/// optimization by the gradient reversal layer, not by this value.
inline double total_loss(double loss_y, double loss_d, double lambda) {
    return loss_y - lambda * loss_d;
}

}  // namespace darnn

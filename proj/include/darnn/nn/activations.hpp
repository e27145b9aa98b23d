#pragma once

#include <algorithm>
#include <cmath>

#include "darnn/core/mat.hpp"

namespace darnn {

template <class Real>
inline Real sigmoid(Real x) {
    if (x >= Real(0)) {
        return Real(1) / (Real(1) + std::exp(-x));
    }
    const Real e = std::exp(x);
    return e / (Real(1) + e);
}

template <class Real>
inline void sigmoid_inplace(Vec<Real>& v) {
    for (auto& x : v) x = sigmoid(x);
}

template <class Real>
inline void tanh_inplace(Vec<Real>& v) {
    for (auto& x : v) x = std::tanh(x);
}

/// Derivative of sigmoid expressed through its output value.
template <class Real>
inline Real dsigmoid_from_value(Real s) {
    return s * (Real(1) - s);
}

/// Derivative of tanh expressed through its output value.
template <class Real>
inline Real dtanh_from_value(Real t) {
    return Real(1) - t * t;
}

/// Numerically stable softmax (max-subtraction). Output entries are strictly
/// positive and sum to 1.
template <class Real>
inline Vec<Real> softmax(const Vec<Real>& logits) {
    Vec<Real> p(logits.size());
    Real m = logits[0];
    for (Real x : logits) m = std::max(m, x);
    Real sum = Real(0);
    for (Index i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (auto& x : p) x /= sum;
    return p;
}

/// dL/dlogits from dL/dprobs through the softmax Jacobian:
/// dlogit = p ⊙ (dprob − <dprob, p>).
template <class Real>
inline Vec<Real> softmax_backward(const Vec<Real>& probs, const Vec<Real>& dprobs) {
    Real dot = Real(0);
    for (Index i = 0; i < probs.size(); ++i) dot += dprobs[i] * probs[i];
    Vec<Real> d(probs.size());
    for (Index i = 0; i < probs.size(); ++i) d[i] = probs[i] * (dprobs[i] - dot);
    return d;
}

}  // namespace darnn

#pragma once

#include <cmath>

#include "darnn/core/mat.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/nn/activations.hpp"

namespace darnn {

template <class Real>
struct DenseParams {
    Index input = 0;
    Index output = 0;
    Mat<Real> W, b;

    static DenseParams shaped(Index input, Index output) {
        DenseParams d;
        d.input = input;
        d.output = output;
        d.W = Mat<Real>(output, input);
        d.b = Mat<Real>(output, 1);
        return d;
    }

    DenseParams zero_like() const {
        DenseParams z = *this;
        z.W.zero();
        z.b.zero();
        return z;
    }

    void init_glorot(Rng& rng, Real bias_value = Real(0)) {
        const double lim = std::sqrt(6.0 / static_cast<double>(input + output));
        for (auto& v : W.a) v = static_cast<Real>(rng.uniform(-lim, lim));
        b.fill(bias_value);
    }

    template <class F>
    void for_each_mat(F&& f) {
        f("W", W);
        f("b", b);
    }

    Index parameter_count() const { return W.size() + b.size(); }
};

template <class Real>
inline Vec<Real> dense_linear(const DenseParams<Real>& p, const Vec<Real>& x) {
    require_len(x, p.input, "dense input");
    Vec<Real> y;
    matvec(p.W, x, y);
    for (Index k = 0; k < p.output; ++k) y[k] += p.b.a[k];
    return y;
}

template <class Real>
inline Vec<Real> dense_tanh(const DenseParams<Real>& p, const Vec<Real>& x) {
    Vec<Real> y = dense_linear(p, x);
    tanh_inplace(y);
    return y;
}

template <class Real>
inline Vec<Real> dense_softmax(const DenseParams<Real>& p, const Vec<Real>& x) {
    return softmax(dense_linear(p, x));
}

template <class Real>
inline Vec<Real> dense_sigmoid(const DenseParams<Real>& p, const Vec<Real>& x) {
    Vec<Real> y = dense_linear(p, x);
    sigmoid_inplace(y);
    return y;
}

/// Backward through W x + b given dL/d(pre-activation). Accumulates into
/// `grads`, overwrites dx.
template <class Real>
inline void dense_linear_backward(const DenseParams<Real>& p, const Vec<Real>& x,
                                  const Vec<Real>& dpre, DenseParams<Real>& grads,
                                  Vec<Real>& dx) {
    add_outer(grads.W, dpre, x);
    for (Index k = 0; k < p.output; ++k) grads.b.a[k] += dpre[k];
    dx.assign(p.input, Real(0));
    matvec_t_add(p.W, dpre, dx);
}

/// Backward through y = tanh(Wx + b) given dL/dy and the forward output y.
template <class Real>
inline void dense_tanh_backward(const DenseParams<Real>& p, const Vec<Real>& x,
                                const Vec<Real>& y, const Vec<Real>& dy,
                                DenseParams<Real>& grads, Vec<Real>& dx) {
    Vec<Real> dpre(p.output);
    for (Index k = 0; k < p.output; ++k) dpre[k] = dy[k] * dtanh_from_value(y[k]);
    dense_linear_backward(p, x, dpre, grads, dx);
}

/// Backward through y = softmax(Wx + b) given dL/dy (probability gradient).
template <class Real>
inline void dense_softmax_backward(const DenseParams<Real>& p, const Vec<Real>& x,
                                   const Vec<Real>& probs, const Vec<Real>& dprobs,
                                   DenseParams<Real>& grads, Vec<Real>& dx) {
    const Vec<Real> dlogits = softmax_backward(probs, dprobs);
    dense_linear_backward(p, x, dlogits, grads, dx);
}

}  // namespace darnn

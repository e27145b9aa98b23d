#pragma once

#include <cmath>

#include "darnn/core/mat.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/nn/activations.hpp"

namespace darnn {

/// The cell equations use tanh on the input and output gates. That is the
/// default (`AsPrinted`); `Conventional` switches both to sigmoid. The forget
/// gate is always a sigmoid.
enum class GateActivation { AsPrinted, Conventional };

/// Peephole weights read c_{t-1} in all three gates. `FullMatrix` stores them
/// as H×H matrices, `Diagonal` as length-H vectors (stored H×1).
enum class PeepholeMode { FullMatrix, Diagonal };

template <class Real>
inline Real gate_act(GateActivation g, Real x) {
    return g == GateActivation::AsPrinted ? std::tanh(x) : sigmoid(x);
}

template <class Real>
inline Real gate_act_deriv(GateActivation g, Real value) {
    return g == GateActivation::AsPrinted ? dtanh_from_value(value) : dsigmoid_from_value(value);
}

template <class Real>
struct LstmParams {
    Index input = 0;
    Index hidden = 0;
    GateActivation gate_activation = GateActivation::AsPrinted;
    PeepholeMode peephole = PeepholeMode::FullMatrix;

    Mat<Real> W_xi, W_hi, W_ci, b_i;
    Mat<Real> W_xf, W_hf, W_cf, b_f;
    Mat<Real> W_xo, W_ho, W_co, b_o;
    Mat<Real> W_xc, W_hc, b_c;

    static LstmParams shaped(Index input, Index hidden,
                             GateActivation g = GateActivation::AsPrinted,
                             PeepholeMode p = PeepholeMode::FullMatrix) {
        LstmParams lp;
        lp.input = input;
        lp.hidden = hidden;
        lp.gate_activation = g;
        lp.peephole = p;
        const Index pc = p == PeepholeMode::FullMatrix ? hidden : 1;
        lp.W_xi = Mat<Real>(hidden, input);
        lp.W_hi = Mat<Real>(hidden, hidden);
        lp.W_ci = Mat<Real>(hidden, pc);
        lp.b_i = Mat<Real>(hidden, 1);
        lp.W_xf = Mat<Real>(hidden, input);
        lp.W_hf = Mat<Real>(hidden, hidden);
        lp.W_cf = Mat<Real>(hidden, pc);
        lp.b_f = Mat<Real>(hidden, 1);
        lp.W_xo = Mat<Real>(hidden, input);
        lp.W_ho = Mat<Real>(hidden, hidden);
        lp.W_co = Mat<Real>(hidden, pc);
        lp.b_o = Mat<Real>(hidden, 1);
        lp.W_xc = Mat<Real>(hidden, input);
        lp.W_hc = Mat<Real>(hidden, hidden);
        lp.b_c = Mat<Real>(hidden, 1);
        return lp;
    }

    LstmParams zero_like() const {
        LstmParams z = *this;
        z.for_each_mat([](const char*, Mat<Real>& m) { m.zero(); });
        return z;
    }

    /// Glorot-uniform weights; biases of recurrent layers default to 1.
    void init_glorot(Rng& rng, Real bias_value = Real(1)) {
        auto glorot = [&](Mat<Real>& m, Index fan_in, Index fan_out) {
            const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto& v : m.a) v = static_cast<Real>(rng.uniform(-lim, lim));
        };
        for (Mat<Real>* m : {&W_xi, &W_xf, &W_xo, &W_xc}) glorot(*m, input, hidden);
        for (Mat<Real>* m : {&W_hi, &W_hf, &W_ho, &W_hc}) glorot(*m, hidden, hidden);
        for (Mat<Real>* m : {&W_ci, &W_cf, &W_co}) glorot(*m, hidden, hidden);
        for (Mat<Real>* m : {&b_i, &b_f, &b_o, &b_c}) m->fill(bias_value);
    }

    template <class F>
    void for_each_mat(F&& f) {
        f("W_xi", W_xi); f("W_hi", W_hi); f("W_ci", W_ci); f("b_i", b_i);
        f("W_xf", W_xf); f("W_hf", W_hf); f("W_cf", W_cf); f("b_f", b_f);
        f("W_xo", W_xo); f("W_ho", W_ho); f("W_co", W_co); f("b_o", b_o);
        f("W_xc", W_xc); f("W_hc", W_hc); f("b_c", b_c);
    }

    Index parameter_count() const {
        Index n = 0;
        const_cast<LstmParams*>(this)->for_each_mat(
            [&](const char*, Mat<Real>& m) { n += m.size(); });
        return n;
    }
};

/// Variational recurrent-dropout masks: one mask per gate input, sampled once
/// per sequence and applied to h_{t-1} at every timestep.
template <class Real>
struct LstmMasks {
    bool active = false;
    Vec<Real> i, f, o, g;
};

template <class Real>
struct LstmStepCache {
    Vec<Real> x, h_prev, c_prev;
    Vec<Real> i, f, o, g;  // gate activations; g is the tanh cell candidate
    Vec<Real> c, tanh_c;
};

namespace detail {

template <class Real>
inline void peephole_add(const Mat<Real>& W, PeepholeMode mode, const Vec<Real>& c,
                         Vec<Real>& pre) {
    if (mode == PeepholeMode::FullMatrix) {
        matvec_add(W, c, pre);
    } else {
        for (Index k = 0; k < pre.size(); ++k) pre[k] += W.a[k] * c[k];
    }
}

}  // namespace detail

/// One LSTM timestep:
///   i = act_g(W_xi x + W_hi h' + W_ci c' + b_i)
///   f =     σ(W_xf x + W_hf h' + W_cf c' + b_f)
///   o = act_g(W_xo x + W_ho h' + W_co c' + b_o)
///   c = f ⊙ c' + i ⊙ tanh(W_xc x + W_hc h' + b_c)
///   h = o ⊙ tanh(c)
/// `masks`, when active, multiply h' on each gate's recurrent path.
template <class Real>
inline void lstm_step(const LstmParams<Real>& p, const Vec<Real>& x, const Vec<Real>& h_prev,
                      const Vec<Real>& c_prev, Vec<Real>& h_out, Vec<Real>& c_out,
                      LstmStepCache<Real>* cache = nullptr,
                      const LstmMasks<Real>* masks = nullptr) {
    require_len(x, p.input, "lstm x_t");
    require_len(h_prev, p.hidden, "lstm h_prev");
    require_len(c_prev, p.hidden, "lstm c_prev");
    require_shape(p.W_xi, p.hidden, p.input, "W_xi");
    require_shape(p.W_hi, p.hidden, p.hidden, "W_hi");

    const bool dm = masks != nullptr && masks->active;
    Vec<Real> hi_m, hf_m, ho_m, hg_m;
    const Vec<Real>& hi = dm ? (hi_m = hadamard(h_prev, masks->i)) : h_prev;
    const Vec<Real>& hf = dm ? (hf_m = hadamard(h_prev, masks->f)) : h_prev;
    const Vec<Real>& ho = dm ? (ho_m = hadamard(h_prev, masks->o)) : h_prev;
    const Vec<Real>& hg = dm ? (hg_m = hadamard(h_prev, masks->g)) : h_prev;

    Vec<Real> i, f, o, g;
    matvec(p.W_xi, x, i);
    matvec_add(p.W_hi, hi, i);
    detail::peephole_add(p.W_ci, p.peephole, c_prev, i);
    for (Index k = 0; k < p.hidden; ++k) i[k] = gate_act(p.gate_activation, i[k] + p.b_i.a[k]);

    matvec(p.W_xf, x, f);
    matvec_add(p.W_hf, hf, f);
    detail::peephole_add(p.W_cf, p.peephole, c_prev, f);
    for (Index k = 0; k < p.hidden; ++k) f[k] = sigmoid(f[k] + p.b_f.a[k]);

    matvec(p.W_xo, x, o);
    matvec_add(p.W_ho, ho, o);
    detail::peephole_add(p.W_co, p.peephole, c_prev, o);
    for (Index k = 0; k < p.hidden; ++k) o[k] = gate_act(p.gate_activation, o[k] + p.b_o.a[k]);

    matvec(p.W_xc, x, g);
    matvec_add(p.W_hc, hg, g);
    for (Index k = 0; k < p.hidden; ++k) g[k] = std::tanh(g[k] + p.b_c.a[k]);

    c_out.assign(p.hidden, Real(0));
    h_out.assign(p.hidden, Real(0));
    Vec<Real> tanh_c(p.hidden);
    for (Index k = 0; k < p.hidden; ++k) {
        c_out[k] = f[k] * c_prev[k] + i[k] * g[k];
        tanh_c[k] = std::tanh(c_out[k]);
        h_out[k] = o[k] * tanh_c[k];
    }

    if (cache != nullptr) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->c_prev = c_prev;
        cache->i = std::move(i);
        cache->f = std::move(f);
        cache->o = std::move(o);
        cache->g = std::move(g);
        cache->c = c_out;
        cache->tanh_c = std::move(tanh_c);
    }
}

namespace detail {

template <class Real>
inline void peephole_backward(const Mat<Real>& W, Mat<Real>& dW, PeepholeMode mode,
                              const Vec<Real>& c_prev, const Vec<Real>& da, Vec<Real>& dc_prev) {
    if (mode == PeepholeMode::FullMatrix) {
        add_outer(dW, da, c_prev);
        matvec_t_add(W, da, dc_prev);
    } else {
        for (Index k = 0; k < da.size(); ++k) {
            dW.a[k] += da[k] * c_prev[k];
            dc_prev[k] += W.a[k] * da[k];
        }
    }
}

}  // namespace detail

/// Exact gradient of lstm_step. `grads` accumulates; dh_prev/dc_prev/dx are
/// overwritten. The same masks passed to the forward must be passed here.
template <class Real>
inline void lstm_backward(const LstmParams<Real>& p, const LstmStepCache<Real>& cache,
                          const Vec<Real>& dh, const Vec<Real>& dc_in, LstmParams<Real>& grads,
                          Vec<Real>& dx, Vec<Real>& dh_prev, Vec<Real>& dc_prev,
                          const LstmMasks<Real>* masks = nullptr) {
    const Index H = p.hidden;
    const bool dm = masks != nullptr && masks->active;

    Vec<Real> dc(H), da_i(H), da_f(H), da_o(H), da_g(H);
    dc_prev.assign(H, Real(0));
    dh_prev.assign(H, Real(0));
    dx.assign(p.input, Real(0));

    for (Index k = 0; k < H; ++k) {
        const Real do_k = dh[k] * cache.tanh_c[k];
        dc[k] = dc_in[k] + dh[k] * cache.o[k] * dtanh_from_value(cache.tanh_c[k]);
        da_o[k] = do_k * gate_act_deriv(p.gate_activation, cache.o[k]);
        da_i[k] = dc[k] * cache.g[k] * gate_act_deriv(p.gate_activation, cache.i[k]);
        da_f[k] = dc[k] * cache.c_prev[k] * dsigmoid_from_value(cache.f[k]);
        da_g[k] = dc[k] * cache.i[k] * dtanh_from_value(cache.g[k]);
        dc_prev[k] = dc[k] * cache.f[k];
    }

    auto recurrent_path = [&](const Mat<Real>& W_h, Mat<Real>& dW_h, const Vec<Real>& da,
                              const Vec<Real>& mask) {
        if (dm) {
            const Vec<Real> hm = hadamard(cache.h_prev, mask);
            add_outer(dW_h, da, hm);
            Vec<Real> tmp(W_h.cols, Real(0));
            matvec_t_add(W_h, da, tmp);
            hadamard_add(dh_prev, tmp, mask);
        } else {
            add_outer(dW_h, da, cache.h_prev);
            matvec_t_add(W_h, da, dh_prev);
        }
    };

    static const Vec<Real> kNoMask;
    add_outer(grads.W_xi, da_i, cache.x);
    recurrent_path(p.W_hi, grads.W_hi, da_i, dm ? masks->i : kNoMask);
    detail::peephole_backward(p.W_ci, grads.W_ci, p.peephole, cache.c_prev, da_i, dc_prev);
    matvec_t_add(p.W_xi, da_i, dx);

    add_outer(grads.W_xf, da_f, cache.x);
    recurrent_path(p.W_hf, grads.W_hf, da_f, dm ? masks->f : kNoMask);
    detail::peephole_backward(p.W_cf, grads.W_cf, p.peephole, cache.c_prev, da_f, dc_prev);
    matvec_t_add(p.W_xf, da_f, dx);

    add_outer(grads.W_xo, da_o, cache.x);
    recurrent_path(p.W_ho, grads.W_ho, da_o, dm ? masks->o : kNoMask);
    detail::peephole_backward(p.W_co, grads.W_co, p.peephole, cache.c_prev, da_o, dc_prev);
    matvec_t_add(p.W_xo, da_o, dx);

    add_outer(grads.W_xc, da_g, cache.x);
    recurrent_path(p.W_hc, grads.W_hc, da_g, dm ? masks->g : kNoMask);
    matvec_t_add(p.W_xc, da_g, dx);

    for (Index k = 0; k < H; ++k) {
        grads.b_i.a[k] += da_i[k];
        grads.b_f.a[k] += da_f[k];
        grads.b_o.a[k] += da_o[k];
        grads.b_c.a[k] += da_g[k];
    }
}

}  // namespace darnn

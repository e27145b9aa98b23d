#pragma once

#include <cmath>

#include "darnn/core/mat.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/nn/activations.hpp"

namespace darnn {

/// The update equation is self-referential as typeset; `Standard` reads it as
/// the usual GRU, h = z ⊙ h' + (1−z) ⊙ candidate. `Swapped` is the only other
/// consistent reading (roles of z and 1−z exchanged).
enum class GruReading { Standard, Swapped };

template <class Real>
struct GruParams {
    Index input = 0;
    Index hidden = 0;
    GruReading reading = GruReading::Standard;

    Mat<Real> W_xr, W_hr, b_r;
    Mat<Real> W_xz, W_hz, b_z;
    Mat<Real> W_xh, W_hh, b_h;

    static GruParams shaped(Index input, Index hidden, GruReading reading = GruReading::Standard) {
        GruParams g;
        g.input = input;
        g.hidden = hidden;
        g.reading = reading;
        g.W_xr = Mat<Real>(hidden, input);
        g.W_hr = Mat<Real>(hidden, hidden);
        g.b_r = Mat<Real>(hidden, 1);
        g.W_xz = Mat<Real>(hidden, input);
        g.W_hz = Mat<Real>(hidden, hidden);
        g.b_z = Mat<Real>(hidden, 1);
        g.W_xh = Mat<Real>(hidden, input);
        g.W_hh = Mat<Real>(hidden, hidden);
        g.b_h = Mat<Real>(hidden, 1);
        return g;
    }

    GruParams zero_like() const {
        GruParams z = *this;
        z.for_each_mat([](const char*, Mat<Real>& m) { m.zero(); });
        return z;
    }

    void init_glorot(Rng& rng, Real bias_value = Real(1)) {
        auto glorot = [&](Mat<Real>& m, Index fan_in, Index fan_out) {
            const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (auto& v : m.a) v = static_cast<Real>(rng.uniform(-lim, lim));
        };
        for (Mat<Real>* m : {&W_xr, &W_xz, &W_xh}) glorot(*m, input, hidden);
        for (Mat<Real>* m : {&W_hr, &W_hz, &W_hh}) glorot(*m, hidden, hidden);
        for (Mat<Real>* m : {&b_r, &b_z, &b_h}) m->fill(bias_value);
    }

    template <class F>
    void for_each_mat(F&& f) {
        f("W_xr", W_xr); f("W_hr", W_hr); f("b_r", b_r);
        f("W_xz", W_xz); f("W_hz", W_hz); f("b_z", b_z);
        f("W_xh", W_xh); f("W_hh", W_hh); f("b_h", b_h);
    }

    Index parameter_count() const {
        Index n = 0;
        const_cast<GruParams*>(this)->for_each_mat(
            [&](const char*, Mat<Real>& m) { n += m.size(); });
        return n;
    }
};

/// Variational recurrent masks: one per gate input (r, z, candidate).
template <class Real>
struct GruMasks {
    bool active = false;
    Vec<Real> r, z, h;
};

template <class Real>
struct GruStepCache {
    Vec<Real> x, h_prev;
    Vec<Real> r, z, hc;   // gate activations and tanh candidate
    Vec<Real> rh;         // r ⊙ (masked h_prev), input to W_hh
};

/// One GRU timestep:
///   r = σ(W_xr x + W_hr h' + b_r)
///   z = σ(W_xz x + W_hz h' + b_z)
///   candidate = tanh(W_xh x + W_hh (r ⊙ h') + b_h)
///   h = z ⊙ h' + (1−z) ⊙ candidate          (Standard reading)
template <class Real>
inline void gru_step(const GruParams<Real>& p, const Vec<Real>& x, const Vec<Real>& h_prev,
                     Vec<Real>& h_out, GruStepCache<Real>* cache = nullptr,
                     const GruMasks<Real>* masks = nullptr) {
    require_len(x, p.input, "gru x_t");
    require_len(h_prev, p.hidden, "gru h_prev");
    require_shape(p.W_xr, p.hidden, p.input, "W_xr");
    require_shape(p.W_hr, p.hidden, p.hidden, "W_hr");

    const bool dm = masks != nullptr && masks->active;
    Vec<Real> hr_m, hz_m, hh_m;
    const Vec<Real>& hr = dm ? (hr_m = hadamard(h_prev, masks->r)) : h_prev;
    const Vec<Real>& hz = dm ? (hz_m = hadamard(h_prev, masks->z)) : h_prev;
    const Vec<Real>& hh = dm ? (hh_m = hadamard(h_prev, masks->h)) : h_prev;

    Vec<Real> r, z, hc;
    matvec(p.W_xr, x, r);
    matvec_add(p.W_hr, hr, r);
    for (Index k = 0; k < p.hidden; ++k) r[k] = sigmoid(r[k] + p.b_r.a[k]);

    matvec(p.W_xz, x, z);
    matvec_add(p.W_hz, hz, z);
    for (Index k = 0; k < p.hidden; ++k) z[k] = sigmoid(z[k] + p.b_z.a[k]);

    Vec<Real> rh(p.hidden);
    for (Index k = 0; k < p.hidden; ++k) rh[k] = r[k] * hh[k];

    matvec(p.W_xh, x, hc);
    matvec_add(p.W_hh, rh, hc);
    for (Index k = 0; k < p.hidden; ++k) hc[k] = std::tanh(hc[k] + p.b_h.a[k]);

    h_out.assign(p.hidden, Real(0));
    if (p.reading == GruReading::Standard) {
        for (Index k = 0; k < p.hidden; ++k)
            h_out[k] = z[k] * h_prev[k] + (Real(1) - z[k]) * hc[k];
    } else {
        for (Index k = 0; k < p.hidden; ++k)
            h_out[k] = (Real(1) - z[k]) * h_prev[k] + z[k] * hc[k];
    }

    if (cache != nullptr) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->r = std::move(r);
        cache->z = std::move(z);
        cache->hc = std::move(hc);
        cache->rh = std::move(rh);
    }
}

/// Exact gradient of gru_step; `grads` accumulates.
template <class Real>
inline void gru_backward(const GruParams<Real>& p, const GruStepCache<Real>& cache,
                         const Vec<Real>& dh, GruParams<Real>& grads, Vec<Real>& dx,
                         Vec<Real>& dh_prev, const GruMasks<Real>* masks = nullptr) {
    const Index H = p.hidden;
    const bool dm = masks != nullptr && masks->active;

    dx.assign(p.input, Real(0));
    dh_prev.assign(H, Real(0));

    Vec<Real> dz(H), dhc(H);
    if (p.reading == GruReading::Standard) {
        for (Index k = 0; k < H; ++k) {
            dz[k] = dh[k] * (cache.h_prev[k] - cache.hc[k]);
            dhc[k] = dh[k] * (Real(1) - cache.z[k]);
            dh_prev[k] = dh[k] * cache.z[k];
        }
    } else {
        for (Index k = 0; k < H; ++k) {
            dz[k] = dh[k] * (cache.hc[k] - cache.h_prev[k]);
            dhc[k] = dh[k] * cache.z[k];
            dh_prev[k] = dh[k] * (Real(1) - cache.z[k]);
        }
    }

    Vec<Real> da_h(H);
    for (Index k = 0; k < H; ++k) da_h[k] = dhc[k] * dtanh_from_value(cache.hc[k]);

    add_outer(grads.W_xh, da_h, cache.x);
    add_outer(grads.W_hh, da_h, cache.rh);
    matvec_t_add(p.W_xh, da_h, dx);

    Vec<Real> drh(H, Real(0));
    matvec_t_add(p.W_hh, da_h, drh);

    // rh = r ⊙ (h_prev ⊙ m_h)
    Vec<Real> dr(H), da_r(H), da_z(H);
    for (Index k = 0; k < H; ++k) {
        const Real hm = dm ? cache.h_prev[k] * masks->h[k] : cache.h_prev[k];
        dr[k] = drh[k] * hm;
        const Real back_h = drh[k] * cache.r[k];
        dh_prev[k] += dm ? back_h * masks->h[k] : back_h;
        da_r[k] = dr[k] * dsigmoid_from_value(cache.r[k]);
        da_z[k] = dz[k] * dsigmoid_from_value(cache.z[k]);
    }

    auto recurrent_path = [&](const Mat<Real>& W_h, Mat<Real>& dW_h, const Vec<Real>& da,
                              const Vec<Real>* mask) {
        if (dm) {
            const Vec<Real> hm = hadamard(cache.h_prev, *mask);
            add_outer(dW_h, da, hm);
            Vec<Real> tmp(H, Real(0));
            matvec_t_add(W_h, da, tmp);
            hadamard_add(dh_prev, tmp, *mask);
        } else {
            add_outer(dW_h, da, cache.h_prev);
            matvec_t_add(W_h, da, dh_prev);
        }
    };

    add_outer(grads.W_xr, da_r, cache.x);
    recurrent_path(p.W_hr, grads.W_hr, da_r, dm ? &masks->r : nullptr);
    matvec_t_add(p.W_xr, da_r, dx);

    add_outer(grads.W_xz, da_z, cache.x);
    recurrent_path(p.W_hz, grads.W_hz, da_z, dm ? &masks->z : nullptr);
    matvec_t_add(p.W_xz, da_z, dx);

    for (Index k = 0; k < H; ++k) {
        grads.b_r.a[k] += da_r[k];
        grads.b_z.a[k] += da_z[k];
        grads.b_h.a[k] += da_h[k];
    }
}

}  // namespace darnn

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darnn/core/mat.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/loss/losses.hpp"
#include "darnn/net/config.hpp"
#include "darnn/nn/dense.hpp"
#include "darnn/nn/dropout.hpp"
#include "darnn/nn/gru.hpp"
#include "darnn/nn/lstm.hpp"

namespace darnn {

/// One featurized observation as model input: per-frame rows for the three
/// input streams. Sequences of different lengths are processed over their own
/// length; conceptual front-padding never enters the computation, so padded
/// timesteps contribute exactly zero to losses and gradients.
template <class Real>
struct SeqTensor {
    Mat<Real> phi;    // T×13
    Mat<Real> gamma;  // T×8
    Mat<Real> eta;    // T×3 or T×4

    Index length() const { return phi.rows; }
};

/// Fusion feature extractor + manoeuvre softmax head + adversarial domain
/// head. Layer names (for checkpoints, Adam state and error messages):
/// lstm_phi, lstm_gamma, gru_a, lstm_eta, fusion, maneuver_head,
/// domain_hidden, domain_out.
template <class Real>
struct DaRnnModel {
    NetworkConfig cfg;
    LstmParams<Real> lstm_phi, lstm_gamma, lstm_eta;
    GruParams<Real> gru_a;
    DenseParams<Real> fusion;         // z_t = tanh(W_f [h_a; h_eta] + b_f)
    DenseParams<Real> maneuver_head;  // softmax over num_classes
    DenseParams<Real> domain_hidden;  // tanh
    DenseParams<Real> domain_out;     // sigmoid, 1 unit

    static DaRnnModel shaped(const NetworkConfig& cfg) {
        cfg.validate();
        DaRnnModel m;
        m.cfg = cfg;
        m.lstm_phi = LstmParams<Real>::shaped(cfg.phi_dim, cfg.hidden_phi, cfg.gate_activation,
                                              cfg.peephole_mode);
        m.lstm_gamma = LstmParams<Real>::shaped(cfg.gamma_dim, cfg.hidden_gamma,
                                                cfg.gate_activation, cfg.peephole_mode);
        m.gru_a = GruParams<Real>::shaped(cfg.hidden_phi + cfg.hidden_gamma,
                                          cfg.hidden_fusion_gru, cfg.gru_reading);
        m.lstm_eta = LstmParams<Real>::shaped(cfg.eta_dim, cfg.hidden_eta, cfg.gate_activation,
                                              cfg.peephole_mode);
        m.fusion = DenseParams<Real>::shaped(cfg.hidden_fusion_gru + cfg.hidden_eta,
                                             cfg.fusion_width);
        m.maneuver_head = DenseParams<Real>::shaped(cfg.fusion_width, cfg.num_classes);
        m.domain_hidden = DenseParams<Real>::shaped(cfg.fusion_width, cfg.domain_hidden);
        m.domain_out = DenseParams<Real>::shaped(cfg.domain_hidden, 1);
        return m;
    }

    /// Each tensor gets its own RNG substream keyed by its full name, so the
    /// presence or absence of other layers never perturbs an init.
    static DaRnnModel build(const NetworkConfig& cfg, std::uint64_t seed) {
        DaRnnModel m = shaped(cfg);
        auto layer_rng = [&](const char* layer) { return Rng(mix_seed(seed, fnv1a64(layer))); };
        {
            Rng r = layer_rng("lstm_phi");
            m.lstm_phi.init_glorot(r);
        }
        {
            Rng r = layer_rng("lstm_gamma");
            m.lstm_gamma.init_glorot(r);
        }
        {
            Rng r = layer_rng("gru_a");
            m.gru_a.init_glorot(r);
        }
        {
            Rng r = layer_rng("lstm_eta");
            m.lstm_eta.init_glorot(r);
        }
        {
            Rng r = layer_rng("fusion");
            m.fusion.init_glorot(r);
        }
        {
            Rng r = layer_rng("maneuver_head");
            m.maneuver_head.init_glorot(r);
        }
        {
            Rng r = layer_rng("domain_hidden");
            m.domain_hidden.init_glorot(r);
        }
        {
            Rng r = layer_rng("domain_out");
            m.domain_out.init_glorot(r);
        }
        return m;
    }

    DaRnnModel zero_like() const {
        DaRnnModel z = *this;
        z.for_each_param([](const std::string&, Mat<Real>& m) { m.zero(); });
        return z;
    }

    template <class F>
    void for_each_param(F&& f) {
        auto scoped = [&](const char* layer, auto& params) {
            params.for_each_mat([&](const char* name, Mat<Real>& m) {
                f(std::string(layer) + "." + name, m);
            });
        };
        scoped("lstm_phi", lstm_phi);
        scoped("lstm_gamma", lstm_gamma);
        scoped("gru_a", gru_a);
        scoped("lstm_eta", lstm_eta);
        scoped("fusion", fusion);
        scoped("maneuver_head", maneuver_head);
        scoped("domain_hidden", domain_hidden);
        scoped("domain_out", domain_out);
    }

    template <class F>
    void for_each_param(F&& f) const {
        const_cast<DaRnnModel*>(this)->for_each_param(
            [&](const std::string& name, Mat<Real>& m) { f(name, const_cast<const Mat<Real>&>(m)); });
    }

    Index parameter_count() const {
        Index n = 0;
        for_each_param([&](const std::string&, const Mat<Real>& m) { n += m.size(); });
        return n;
    }

    /// Layers transferable between runs for fine-tuning: the feature
    /// extractor and the manoeuvre head. The domain head never transfers.
    static const std::vector<std::string>& transferable_layers() {
        static const std::vector<std::string> layers = {
            "lstm_phi", "lstm_gamma", "gru_a", "lstm_eta", "fusion", "maneuver_head"};
        return layers;
    }
};

enum class RunMode { Train, Infer };

/// Everything the exact backward pass needs: per-timestep step caches, the
/// dropout masks that were drawn, and the intermediate (dropped) activations.
template <class Real>
struct ExtractorCache {
    RunMode mode = RunMode::Infer;
    std::vector<LstmStepCache<Real>> phi_steps, gamma_steps, eta_steps;
    std::vector<GruStepCache<Real>> a_steps;
    LstmMasks<Real> m_phi, m_gamma, m_eta;
    GruMasks<Real> m_a;
    std::vector<Vec<Real>> o_phi, o_gamma, o_a, o_eta, o_z;  // per-timestep output masks
    std::vector<Vec<Real>> hd_phi, hd_gamma, u, hd_a, hd_eta, v, z;
    Mat<Real> zd;  // T×fusion_width, the extractor output (post output-dropout)
};

namespace detail {

template <class Real>
inline LstmMasks<Real> sample_lstm_masks(Index hidden, double rate, Rng& rng) {
    LstmMasks<Real> m;
    m.active = true;
    m.i = make_dropout_mask<Real>(hidden, rate, rng);
    m.f = make_dropout_mask<Real>(hidden, rate, rng);
    m.o = make_dropout_mask<Real>(hidden, rate, rng);
    m.g = make_dropout_mask<Real>(hidden, rate, rng);
    return m;
}

template <class Real>
inline GruMasks<Real> sample_gru_masks(Index hidden, double rate, Rng& rng) {
    GruMasks<Real> m;
    m.active = true;
    m.r = make_dropout_mask<Real>(hidden, rate, rng);
    m.z = make_dropout_mask<Real>(hidden, rate, rng);
    m.h = make_dropout_mask<Real>(hidden, rate, rng);
    return m;
}

template <class Real>
inline Vec<Real> apply_mask(const Vec<Real>& x, const Vec<Real>& mask) {
    return mask.empty() ? x : hadamard(x, mask);
}

}  // namespace detail

/// Runs the fusion extractor over a sequence. In Train mode, variational
/// recurrent masks and per-timestep output masks are drawn deterministically
/// from `mask_seed`; re-running with the same seed reproduces the forward
/// bit-exactly.
template <class Real>
inline ExtractorCache<Real> extractor_forward(const DaRnnModel<Real>& model,
                                              const SeqTensor<Real>& x, RunMode mode,
                                              std::uint64_t mask_seed = 0) {
    const NetworkConfig& cfg = model.cfg;
    const Index T = x.phi.rows;
    if (T == 0) throw SchemaError("extractor_forward: empty sequence");
    if (x.phi.cols != cfg.phi_dim || x.gamma.cols != cfg.gamma_dim ||
        x.eta.cols != cfg.eta_dim || x.gamma.rows != T || x.eta.rows != T) {
        throw SchemaError("extractor_forward: frame feature widths (" +
                          std::to_string(x.phi.cols) + "/" + std::to_string(x.gamma.cols) + "/" +
                          std::to_string(x.eta.cols) + ") do not match config (" +
                          std::to_string(cfg.phi_dim) + "/" + std::to_string(cfg.gamma_dim) +
                          "/" + std::to_string(cfg.eta_dim) + ")");
    }

    ExtractorCache<Real> c;
    c.mode = mode;
    const bool train = mode == RunMode::Train;
    Rng rec_rng(mix_seed(mask_seed, fnv1a64("recurrent")));
    Rng out_rng(mix_seed(mask_seed, fnv1a64("output")));
    if (train && cfg.dropout_recurrent > 0.0) {
        c.m_phi = detail::sample_lstm_masks<Real>(cfg.hidden_phi, cfg.dropout_recurrent, rec_rng);
        c.m_gamma =
            detail::sample_lstm_masks<Real>(cfg.hidden_gamma, cfg.dropout_recurrent, rec_rng);
        c.m_a = detail::sample_gru_masks<Real>(cfg.hidden_fusion_gru, cfg.dropout_recurrent,
                                               rec_rng);
        c.m_eta = detail::sample_lstm_masks<Real>(cfg.hidden_eta, cfg.dropout_recurrent, rec_rng);
    }

    c.phi_steps.resize(T);
    c.gamma_steps.resize(T);
    c.a_steps.resize(T);
    c.eta_steps.resize(T);
    c.hd_phi.resize(T);
    c.hd_gamma.resize(T);
    c.u.resize(T);
    c.hd_a.resize(T);
    c.hd_eta.resize(T);
    c.v.resize(T);
    c.z.resize(T);
    if (train && cfg.dropout_output > 0.0) {
        c.o_phi.resize(T);
        c.o_gamma.resize(T);
        c.o_a.resize(T);
        c.o_eta.resize(T);
        c.o_z.resize(T);
    }
    c.zd = Mat<Real>(T, cfg.fusion_width);

    Vec<Real> h_phi(cfg.hidden_phi, Real(0)), c_phi(cfg.hidden_phi, Real(0));
    Vec<Real> h_gamma(cfg.hidden_gamma, Real(0)), c_gamma(cfg.hidden_gamma, Real(0));
    Vec<Real> h_a(cfg.hidden_fusion_gru, Real(0));
    Vec<Real> h_eta(cfg.hidden_eta, Real(0)), c_eta(cfg.hidden_eta, Real(0));

    auto row = [](const Mat<Real>& m, Index t) {
        return Vec<Real>(m.a.begin() + t * m.cols, m.a.begin() + (t + 1) * m.cols);
    };

    for (Index t = 0; t < T; ++t) {
        Vec<Real> h_phi_next, c_phi_next, h_gamma_next, c_gamma_next;
        lstm_step(model.lstm_phi, row(x.phi, t), h_phi, c_phi, h_phi_next, c_phi_next,
                  &c.phi_steps[t], c.m_phi.active ? &c.m_phi : nullptr);
        lstm_step(model.lstm_gamma, row(x.gamma, t), h_gamma, c_gamma, h_gamma_next, c_gamma_next,
                  &c.gamma_steps[t], c.m_gamma.active ? &c.m_gamma : nullptr);
        h_phi = std::move(h_phi_next);
        c_phi = std::move(c_phi_next);
        h_gamma = std::move(h_gamma_next);
        c_gamma = std::move(c_gamma_next);

        if (train && cfg.dropout_output > 0.0) {
            c.o_phi[t] = make_dropout_mask<Real>(cfg.hidden_phi, cfg.dropout_output, out_rng);
            c.o_gamma[t] = make_dropout_mask<Real>(cfg.hidden_gamma, cfg.dropout_output, out_rng);
        }
        c.hd_phi[t] = detail::apply_mask(h_phi, c.o_phi.empty() ? Vec<Real>() : c.o_phi[t]);
        c.hd_gamma[t] = detail::apply_mask(h_gamma, c.o_gamma.empty() ? Vec<Real>() : c.o_gamma[t]);

        c.u[t] = c.hd_phi[t];
        c.u[t].insert(c.u[t].end(), c.hd_gamma[t].begin(), c.hd_gamma[t].end());

        Vec<Real> h_a_next;
        gru_step(model.gru_a, c.u[t], h_a, h_a_next, &c.a_steps[t],
                 c.m_a.active ? &c.m_a : nullptr);
        h_a = std::move(h_a_next);

        Vec<Real> h_eta_next, c_eta_next;
        lstm_step(model.lstm_eta, row(x.eta, t), h_eta, c_eta, h_eta_next, c_eta_next,
                  &c.eta_steps[t], c.m_eta.active ? &c.m_eta : nullptr);
        h_eta = std::move(h_eta_next);
        c_eta = std::move(c_eta_next);

        if (train && cfg.dropout_output > 0.0) {
            c.o_a[t] = make_dropout_mask<Real>(cfg.hidden_fusion_gru, cfg.dropout_output, out_rng);
            c.o_eta[t] = make_dropout_mask<Real>(cfg.hidden_eta, cfg.dropout_output, out_rng);
        }
        c.hd_a[t] = detail::apply_mask(h_a, c.o_a.empty() ? Vec<Real>() : c.o_a[t]);
        c.hd_eta[t] = detail::apply_mask(h_eta, c.o_eta.empty() ? Vec<Real>() : c.o_eta[t]);

        c.v[t] = c.hd_a[t];
        c.v[t].insert(c.v[t].end(), c.hd_eta[t].begin(), c.hd_eta[t].end());

        c.z[t] = dense_tanh(model.fusion, c.v[t]);

        Vec<Real> zd_t;
        if (train && cfg.dropout_output > 0.0) {
            c.o_z[t] = make_dropout_mask<Real>(cfg.fusion_width, cfg.dropout_output, out_rng);
            zd_t = hadamard(c.z[t], c.o_z[t]);
        } else {
            zd_t = c.z[t];
        }
        for (Index k = 0; k < cfg.fusion_width; ++k) c.zd(t, k) = zd_t[k];
    }
    return c;
}

/// BPTT through the extractor given dL/d(zd). Accumulates into `grads`.
template <class Real>
inline void extractor_backward(const DaRnnModel<Real>& model, const ExtractorCache<Real>& c,
                               const Mat<Real>& dzd, DaRnnModel<Real>& grads) {
    const NetworkConfig& cfg = model.cfg;
    const Index T = c.zd.rows;

    Vec<Real> dh_phi(cfg.hidden_phi, Real(0)), dc_phi(cfg.hidden_phi, Real(0));
    Vec<Real> dh_gamma(cfg.hidden_gamma, Real(0)), dc_gamma(cfg.hidden_gamma, Real(0));
    Vec<Real> dh_a(cfg.hidden_fusion_gru, Real(0));
    Vec<Real> dh_eta(cfg.hidden_eta, Real(0)), dc_eta(cfg.hidden_eta, Real(0));

    for (Index ti = T; ti-- > 0;) {
        // output dropout on z
        Vec<Real> dz(cfg.fusion_width);
        for (Index k = 0; k < cfg.fusion_width; ++k) {
            const Real m = c.o_z.empty() ? Real(1) : c.o_z[ti][k];
            dz[k] = dzd(ti, k) * m;
        }

        Vec<Real> dv;
        dense_tanh_backward(model.fusion, c.v[ti], c.z[ti], dz, grads.fusion, dv);

        // split v = [hd_a; hd_eta]
        Vec<Real> dhd_a(dv.begin(), dv.begin() + cfg.hidden_fusion_gru);
        Vec<Real> dhd_eta(dv.begin() + cfg.hidden_fusion_gru, dv.end());
        for (Index k = 0; k < cfg.hidden_fusion_gru; ++k) {
            const Real m = c.o_a.empty() ? Real(1) : c.o_a[ti][k];
            dh_a[k] += dhd_a[k] * m;
        }
        for (Index k = 0; k < cfg.hidden_eta; ++k) {
            const Real m = c.o_eta.empty() ? Real(1) : c.o_eta[ti][k];
            dh_eta[k] += dhd_eta[k] * m;
        }

        Vec<Real> du, dh_a_prev;
        gru_backward(model.gru_a, c.a_steps[ti], dh_a, grads.gru_a, du, dh_a_prev,
                     c.m_a.active ? &c.m_a : nullptr);
        dh_a = std::move(dh_a_prev);

        Vec<Real> dx_eta, dh_eta_prev, dc_eta_prev;
        lstm_backward(model.lstm_eta, c.eta_steps[ti], dh_eta, dc_eta, grads.lstm_eta, dx_eta,
                      dh_eta_prev, dc_eta_prev, c.m_eta.active ? &c.m_eta : nullptr);
        dh_eta = std::move(dh_eta_prev);
        dc_eta = std::move(dc_eta_prev);

        // split u = [hd_phi; hd_gamma]
        for (Index k = 0; k < cfg.hidden_phi; ++k) {
            const Real m = c.o_phi.empty() ? Real(1) : c.o_phi[ti][k];
            dh_phi[k] += du[k] * m;
        }
        for (Index k = 0; k < cfg.hidden_gamma; ++k) {
            const Real m = c.o_gamma.empty() ? Real(1) : c.o_gamma[ti][k];
            dh_gamma[k] += du[cfg.hidden_phi + k] * m;
        }

        Vec<Real> dx_phi, dh_phi_prev, dc_phi_prev;
        lstm_backward(model.lstm_phi, c.phi_steps[ti], dh_phi, dc_phi, grads.lstm_phi, dx_phi,
                      dh_phi_prev, dc_phi_prev, c.m_phi.active ? &c.m_phi : nullptr);
        dh_phi = std::move(dh_phi_prev);
        dc_phi = std::move(dc_phi_prev);

        Vec<Real> dx_gamma, dh_gamma_prev, dc_gamma_prev;
        lstm_backward(model.lstm_gamma, c.gamma_steps[ti], dh_gamma, dc_gamma, grads.lstm_gamma,
                      dx_gamma, dh_gamma_prev, dc_gamma_prev,
                      c.m_gamma.active ? &c.m_gamma : nullptr);
        dh_gamma = std::move(dh_gamma_prev);
        dc_gamma = std::move(dc_gamma_prev);
    }
}

/// Per-timestep manoeuvre probabilities y_t = softmax(W_y zd_t + b_y).
template <class Real>
inline Mat<Real> maneuver_probs(const DaRnnModel<Real>& model, const Mat<Real>& zd) {
    Mat<Real> probs(zd.rows, model.cfg.num_classes);
    Vec<Real> z(zd.cols);
    for (Index t = 0; t < zd.rows; ++t) {
        for (Index k = 0; k < zd.cols; ++k) z[k] = zd(t, k);
        const Vec<Real> p = dense_softmax(model.maneuver_head, z);
        for (Index j = 0; j < p.size(); ++j) probs(t, j) = p[j];
    }
    return probs;
}

/// Head backward from per-timestep logit gradients; adds into dzd.
template <class Real>
inline void maneuver_head_backward(const DaRnnModel<Real>& model, const Mat<Real>& zd,
                                   const Mat<Real>& dlogits, DaRnnModel<Real>& grads,
                                   Mat<Real>& dzd) {
    Vec<Real> z(zd.cols), dl(dlogits.cols), dz;
    for (Index t = 0; t < zd.rows; ++t) {
        for (Index k = 0; k < zd.cols; ++k) z[k] = zd(t, k);
        for (Index j = 0; j < dlogits.cols; ++j) dl[j] = dlogits(t, j);
        dense_linear_backward(model.maneuver_head, z, dl, grads.maneuver_head, dz);
        for (Index k = 0; k < zd.cols; ++k) dzd(t, k) += dz[k];
    }
}

template <class Real>
struct DomainHeadCache {
    Vec<Real> input;   // extractor output fed to the head (post-GRL forward)
    Vec<Real> hidden;  // tanh activations
    double p = 0.5;
};

/// p(target | z) through GRL -> tanh hidden -> sigmoid. The GRL forward is
/// the identity on z.
template <class Real>
inline DomainHeadCache<Real> domain_head_forward(const DaRnnModel<Real>& model,
                                                 const Vec<Real>& z) {
    DomainHeadCache<Real> c;
    c.input = gradient_reversal_forward(z);
    c.hidden = dense_tanh(model.domain_hidden, c.input);
    const Vec<Real> out = dense_sigmoid(model.domain_out, c.hidden);
    c.p = static_cast<double>(out[0]);
    return c;
}

/// Backward from the domain logit gradient. Head parameters receive the
/// plain gradient; the returned dz (added into the extractor flow) passes
/// through the reversal, i.e. is scaled by -lambda.
template <class Real>
inline void domain_head_backward(const DaRnnModel<Real>& model, const DomainHeadCache<Real>& c,
                                 double dlogit, double lambda, DaRnnModel<Real>& grads,
                                 Vec<Real>& dz_out) {
    Vec<Real> dhid;
    Vec<Real> dl = {static_cast<Real>(dlogit)};
    dense_linear_backward(model.domain_out, c.hidden, dl, grads.domain_out, dhid);

    Vec<Real> dhid_act(dhid.size());
    for (Index k = 0; k < dhid.size(); ++k)
        dhid_act[k] = dhid[k] * dtanh_from_value(c.hidden[k]);
    Vec<Real> dinput;
    dense_linear_backward(model.domain_hidden, c.input, dhid_act, grads.domain_hidden, dinput);

    dz_out = gradient_reversal_backward(dinput, lambda);
}

}  // namespace darnn

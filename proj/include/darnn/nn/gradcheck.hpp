#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "darnn/core/rng.hpp"
#include "darnn/net/batch.hpp"
#include "darnn/net/model.hpp"

namespace darnn {

struct GradCheckRow {
    std::string suite;
    std::string tensor;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckRow> rows;
    double max_rel_err = 0.0;
    bool passed = false;
};

namespace gcdetail {

template <class Real>
struct FdSettings {
    double step;
    double floor;
};

template <class Real>
inline FdSettings<Real> fd_settings() {
    if constexpr (sizeof(Real) == sizeof(float)) {
        return {1e-3, 5e-2};
    } else {
        return {1e-6, 1e-4};
    }
}

inline double rel_err(double a, double n, double floor) {
    const double denom = std::max({std::abs(a), std::abs(n), floor});
    return std::abs(a - n) / denom;
}

template <class Real>
inline void check_params(const std::string& suite,
                         std::vector<std::pair<std::string, Mat<Real>*>>& params,
                         std::vector<std::pair<std::string, const Mat<Real>*>>& analytic,
                         const std::function<double()>& forward, GradCheckReport& rep) {
    const auto fd = fd_settings<Real>();
    for (std::size_t p = 0; p < params.size(); ++p) {
        Mat<Real>& m = *params[p].second;
        const Mat<Real>& g = *analytic[p].second;
        double worst = 0.0;
        for (Index i = 0; i < m.size(); ++i) {
            const Real saved = m.a[i];
            m.a[i] = saved + static_cast<Real>(fd.step);
            const double fp = forward();
            m.a[i] = saved - static_cast<Real>(fd.step);
            const double fm = forward();
            m.a[i] = saved;
            const double numeric = (fp - fm) / (2.0 * fd.step);
            worst = std::max(worst, rel_err(static_cast<double>(g.a[i]), numeric, fd.floor));
        }
        rep.rows.push_back({suite, params[p].first, worst});
        rep.max_rel_err = std::max(rep.max_rel_err, worst);
    }
}

template <class Real, class P>
inline void randomize(P& params, Rng& rng, double scale = 0.5) {
    params.for_each_mat([&](const char*, Mat<Real>& m) {
        for (auto& v : m.a) v = static_cast<Real>(rng.normal() * scale);
    });
}

template <class Real>
inline Vec<Real> random_vec(Index n, Rng& rng, double scale = 1.0) {
    Vec<Real> v(n);
    for (auto& x : v) x = static_cast<Real>(rng.normal() * scale);
    return v;
}

template <class Real>
inline double dot(const Vec<Real>& a, const Vec<Real>& b) {
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i)
        s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

template <class Real>
inline void lstm_suite(GateActivation ga, PeepholeMode pm, Index D, Index H, std::uint64_t seed,
                       GradCheckReport& rep, const std::string& name) {
    Rng rng(seed);
    auto p = LstmParams<Real>::shaped(D, H, ga, pm);
    randomize<Real>(p, rng);
    const auto x = random_vec<Real>(D, rng);
    const auto h0 = random_vec<Real>(H, rng);
    const auto c0 = random_vec<Real>(H, rng);
    Vec<Real> r_h(H), r_c(H);
    for (auto& v : r_h) v = static_cast<Real>(rng.uniform(0.5, 1.5));
    for (auto& v : r_c) v = static_cast<Real>(rng.uniform(0.5, 1.5));

    auto forward = [&]() {
        Vec<Real> h, c;
        lstm_step<Real>(p, x, h0, c0, h, c, nullptr, nullptr);
        return dot(h, r_h) + dot(c, r_c);
    };
    Vec<Real> h, c;
    LstmStepCache<Real> cache;
    lstm_step(p, x, h0, c0, h, c, &cache);
    auto grads = p.zero_like();
    Vec<Real> dx, dhp, dcp;
    lstm_backward(p, cache, r_h, r_c, grads, dx, dhp, dcp);

    std::vector<std::pair<std::string, Mat<Real>*>> params;
    std::vector<std::pair<std::string, const Mat<Real>*>> analytic;
    p.for_each_mat([&](const char* n, Mat<Real>& m) { params.emplace_back(n, &m); });
    grads.for_each_mat([&](const char* n, Mat<Real>& m) { analytic.emplace_back(n, &m); });
    check_params<Real>(name, params, analytic, forward, rep);
}

template <class Real>
inline void gru_suite(GruReading reading, Index D, Index H, std::uint64_t seed,
                      GradCheckReport& rep, const std::string& name) {
    Rng rng(seed);
    auto p = GruParams<Real>::shaped(D, H, reading);
    randomize<Real>(p, rng);
    const auto x = random_vec<Real>(D, rng);
    const auto h0 = random_vec<Real>(H, rng);
    Vec<Real> r_h(H);
    for (auto& v : r_h) v = static_cast<Real>(rng.uniform(0.5, 1.5));

    auto forward = [&]() {
        Vec<Real> h;
        gru_step<Real>(p, x, h0, h, nullptr, nullptr);
        return dot(h, r_h);
    };
    Vec<Real> h;
    GruStepCache<Real> cache;
    gru_step(p, x, h0, h, &cache);
    auto grads = p.zero_like();
    Vec<Real> dx, dhp;
    gru_backward(p, cache, r_h, grads, dx, dhp);

    std::vector<std::pair<std::string, Mat<Real>*>> params;
    std::vector<std::pair<std::string, const Mat<Real>*>> analytic;
    p.for_each_mat([&](const char* n, Mat<Real>& m) { params.emplace_back(n, &m); });
    grads.for_each_mat([&](const char* n, Mat<Real>& m) { analytic.emplace_back(n, &m); });
    check_params<Real>(name, params, analytic, forward, rep);
}

template <class Real>
inline void dense_suite(Index D, Index H, std::uint64_t seed, GradCheckReport& rep) {
    Rng rng(seed);
    auto p = DenseParams<Real>::shaped(D, H);
    randomize<Real>(p, rng);
    const auto x = random_vec<Real>(D, rng);
    Vec<Real> r(H);
    for (auto& v : r) v = static_cast<Real>(rng.uniform(0.5, 1.5));

    {
        auto forward = [&]() { return dot(dense_tanh(p, x), r); };
        const auto y = dense_tanh(p, x);
        auto grads = p.zero_like();
        Vec<Real> dx;
        dense_tanh_backward(p, x, y, r, grads, dx);
        std::vector<std::pair<std::string, Mat<Real>*>> params = {{"W", &p.W}, {"b", &p.b}};
        std::vector<std::pair<std::string, const Mat<Real>*>> analytic = {{"W", &grads.W},
                                                                          {"b", &grads.b}};
        check_params<Real>("dense_tanh", params, analytic, forward, rep);
    }
    {
        auto forward = [&]() { return dot(dense_softmax(p, x), r); };
        const auto probs = dense_softmax(p, x);
        auto grads = p.zero_like();
        Vec<Real> dx;
        dense_softmax_backward(p, x, probs, r, grads, dx);
        std::vector<std::pair<std::string, Mat<Real>*>> params = {{"W", &p.W}, {"b", &p.b}};
        std::vector<std::pair<std::string, const Mat<Real>*>> analytic = {{"W", &grads.W},
                                                                          {"b", &grads.b}};
        check_params<Real>("dense_softmax", params, analytic, forward, rep);
    }
}

/// End-to-end fusion network + heads + GRL, through the batch objective.
template <class Real>
inline void network_suite(Index H, Index T, std::uint64_t seed, GradCheckReport& rep) {
    NetworkConfig cfg;
    cfg.phi_dim = 3;
    cfg.gamma_dim = 2;
    cfg.eta_dim = 2;
    cfg.hidden_phi = H;
    cfg.hidden_gamma = H;
    cfg.hidden_fusion_gru = H;
    cfg.hidden_eta = H;
    cfg.fusion_width = H;
    cfg.domain_hidden = 2;
    cfg.dropout_recurrent = 0.0;
    cfg.dropout_output = 0.0;
    auto model = DaRnnModel<Real>::build(cfg, seed);
    Rng rng(mix_seed(seed, 1));
    auto seq = [&](Index len) {
        SeqTensor<Real> x;
        x.phi = Mat<Real>(len, cfg.phi_dim);
        x.gamma = Mat<Real>(len, cfg.gamma_dim);
        x.eta = Mat<Real>(len, cfg.eta_dim);
        for (auto& v : x.phi.a) v = static_cast<Real>(rng.normal() * 0.8);
        for (auto& v : x.gamma.a) v = static_cast<Real>(rng.normal() * 0.8);
        for (auto& v : x.eta.a) v = static_cast<Real>(rng.normal() * 0.8);
        return x;
    };
    const auto xs = seq(T);
    const auto xt = seq(T);
    std::vector<BatchSample<Real>> batch = {{&xs, 1, 1, 0, 1}, {&xt, 0, 0, 1, 2}};
    BatchOptions<Real> opt;
    opt.train_mode = false;
    opt.adversarial = true;
    opt.lambda = 1.10;

    auto grads = model.zero_like();
    full_forward_backward(model, batch, opt, grads);

    auto forward_tot = [&]() {
        auto g = model.zero_like();
        const auto s = full_forward_backward(model, batch, opt, g);
        return s.loss_y - opt.lambda * s.loss_d;
    };
    auto forward_domain = [&]() {
        auto g = model.zero_like();
        return full_forward_backward(model, batch, opt, g).loss_d;
    };

    std::vector<std::pair<std::string, Mat<Real>*>> p_shared, p_domain;
    std::vector<std::pair<std::string, const Mat<Real>*>> a_shared, a_domain;
    model.for_each_param([&](const std::string& n, Mat<Real>& m) {
        (n.rfind("domain", 0) == 0 ? p_domain : p_shared).emplace_back(n, &m);
    });
    grads.for_each_param([&](const std::string& n, Mat<Real>& m) {
        (n.rfind("domain", 0) == 0 ? a_domain : a_shared).emplace_back(n, &m);
    });
    check_params<Real>("network", p_shared, a_shared, forward_tot, rep);
    check_params<Real>("network_grl", p_domain, a_domain, forward_domain, rep);
}

}  // namespace gcdetail

/// Finite-difference verification of every analytic gradient: both LSTM gate
/// activations, both peephole modes, both GRU readings, the dense layers and
/// the end-to-end fusion network with the reversal branch, over all requested
/// sizes. Tolerance: 1e-5 in float64, 1e-2 in float32.
template <class Real>
inline GradCheckReport run_gradcheck(const std::vector<Index>& sizes, std::uint64_t seed) {
    GradCheckReport rep;
    std::uint64_t k = 0;
    for (Index h : sizes) {
        for (Index d : sizes) {
            ++k;
            gcdetail::lstm_suite<Real>(GateActivation::AsPrinted, PeepholeMode::FullMatrix, d, h,
                                       mix_seed(seed, k, 1), rep, "lstm_as_printed_full");
            gcdetail::lstm_suite<Real>(GateActivation::Conventional, PeepholeMode::FullMatrix, d,
                                       h, mix_seed(seed, k, 2), rep, "lstm_conventional_full");
            gcdetail::lstm_suite<Real>(GateActivation::AsPrinted, PeepholeMode::Diagonal, d, h,
                                       mix_seed(seed, k, 3), rep, "lstm_as_printed_diag");
            gcdetail::lstm_suite<Real>(GateActivation::Conventional, PeepholeMode::Diagonal, d, h,
                                       mix_seed(seed, k, 4), rep, "lstm_conventional_diag");
            gcdetail::gru_suite<Real>(GruReading::Standard, d, h, mix_seed(seed, k, 5), rep,
                                      "gru_standard");
            gcdetail::gru_suite<Real>(GruReading::Swapped, d, h, mix_seed(seed, k, 6), rep,
                                      "gru_swapped");
            gcdetail::dense_suite<Real>(d, h, mix_seed(seed, k, 7), rep);
        }
    }
    for (Index h : sizes) {
        gcdetail::network_suite<Real>(std::max<Index>(2, std::min<Index>(h, 4)), 4,
                                      mix_seed(seed, h, 8), rep);
    }
    const double tol = sizeof(Real) == sizeof(float) ? 1e-2 : 1e-5;
    rep.passed = rep.max_rel_err < tol;
    return rep;
}

}  // namespace darnn

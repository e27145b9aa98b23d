#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "darnn/core/rng.hpp"
#include "darnn/nn/dense.hpp"
#include "darnn/nn/dropout.hpp"
#include "darnn/nn/gru.hpp"
#include "darnn/nn/lstm.hpp"
#include "oracle_helpers.hpp"

using namespace darnn;

namespace {

template <class P>
void randomize(P& params, Rng& rng, double scale = 0.5) {
    params.for_each_mat([&](const char*, Mat<double>& m) {
        for (auto& v : m.a) v = rng.normal() * scale;
    });
}

Vec<double> random_vec(Index n, Rng& rng, double scale = 1.0) {
    Vec<double> v(n);
    for (auto& x : v) x = rng.normal() * scale;
    return v;
}

double dot(const Vec<double>& a, const Vec<double>& b) {
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("lstm_step: zero parameters annihilate the state") {
    auto p = LstmParams<double>::shaped(3, 4);
    Vec<double> x = {1.0, -2.0, 0.5};
    Vec<double> h0(4, 0.0), c0(4, 0.0), h, c;
    lstm_step(p, x, h0, c0, h, c);
    for (double v : h) CHECK(v == 0.0);
    for (double v : c) CHECK(v == 0.0);
}

TEST_CASE("lstm_step: H=1 closed-form evaluation") {
    // b_f large (forget ~ 1), c_prev = 1, b_i = 0 (tanh(0) = 0 kills the
    // write), b_o large (output gate ~ 1): c = 1, h = tanh(1).
    auto p = LstmParams<double>::shaped(1, 1);
    p.b_f.a[0] = 30.0;
    p.b_o.a[0] = 30.0;
    Vec<double> x = {0.7}, h0 = {0.0}, c0 = {1.0}, h, c;
    lstm_step(p, x, h0, c0, h, c);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(h[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-9));
    CHECK(std::tanh(1.0) == doctest::Approx(0.7616).epsilon(1e-4));
}

TEST_CASE("lstm_backward: zero upstream gives exactly zero gradients") {
    Rng rng(11);
    auto p = LstmParams<double>::shaped(3, 4);
    randomize(p, rng);
    Vec<double> x = random_vec(3, rng), h0 = random_vec(4, rng), c0 = random_vec(4, rng);
    Vec<double> h, c;
    LstmStepCache<double> cache;
    lstm_step(p, x, h0, c0, h, c, &cache);

    auto grads = p.zero_like();
    Vec<double> dh(4, 0.0), dc(4, 0.0), dx, dhp, dcp;
    lstm_backward(p, cache, dh, dc, grads, dx, dhp, dcp);
    grads.for_each_mat([&](const char*, Mat<double>& g) {
        for (double v : g.a) CHECK(v == 0.0);
    });
    for (double v : dx) CHECK(v == 0.0);
}

TEST_CASE("lstm_backward: doubling the upstream doubles every gradient bitwise") {
    Rng rng(12);
    auto p = LstmParams<double>::shaped(3, 4);
    randomize(p, rng);
    Vec<double> x = random_vec(3, rng), h0 = random_vec(4, rng), c0 = random_vec(4, rng);
    Vec<double> h, c;
    LstmStepCache<double> cache;
    lstm_step(p, x, h0, c0, h, c, &cache);

    Vec<double> dh = random_vec(4, rng), dc = random_vec(4, rng);
    Vec<double> dh2(dh), dc2(dc);
    for (auto& v : dh2) v *= 2.0;
    for (auto& v : dc2) v *= 2.0;

    auto g1 = p.zero_like();
    auto g2 = p.zero_like();
    Vec<double> dx, dhp, dcp;
    lstm_backward(p, cache, dh, dc, g1, dx, dhp, dcp);
    lstm_backward(p, cache, dh2, dc2, g2, dx, dhp, dcp);

    std::vector<Mat<double>*> m1, m2;
    g1.for_each_mat([&](const char*, Mat<double>& m) { m1.push_back(&m); });
    g2.for_each_mat([&](const char*, Mat<double>& m) { m2.push_back(&m); });
    for (std::size_t k = 0; k < m1.size(); ++k) {
        for (Index i = 0; i < m1[k]->size(); ++i) {
            CHECK(2.0 * m1[k]->a[i] == m2[k]->a[i]);
        }
    }
}

namespace {

// FD check of one LSTM step through a random projection of (h, c).
double lstm_fd_max_err(GateActivation ga, PeepholeMode pm, Index D, Index H, std::uint64_t seed,
                       bool with_masks = false) {
    Rng rng(seed);
    auto p = LstmParams<double>::shaped(D, H, ga, pm);
    randomize(p, rng);
    Vec<double> x = random_vec(D, rng), h0 = random_vec(H, rng), c0 = random_vec(H, rng);
    Vec<double> r_h(H), r_c(H);
    for (auto& v : r_h) v = rng.uniform(0.5, 1.5);
    for (auto& v : r_c) v = rng.uniform(0.5, 1.5);

    LstmMasks<double> masks;
    if (with_masks) {
        Rng mrng(mix_seed(seed, 99));
        masks.active = true;
        masks.i = make_dropout_mask<double>(H, 0.4, mrng);
        masks.f = make_dropout_mask<double>(H, 0.4, mrng);
        masks.o = make_dropout_mask<double>(H, 0.4, mrng);
        masks.g = make_dropout_mask<double>(H, 0.4, mrng);
    }
    const LstmMasks<double>* mp = with_masks ? &masks : nullptr;

    auto forward = [&]() {
        Vec<double> h, c;
        lstm_step<double>(p, x, h0, c0, h, c, nullptr, mp);
        return dot(h, r_h) + dot(c, r_c);
    };

    Vec<double> h, c;
    LstmStepCache<double> cache;
    lstm_step(p, x, h0, c0, h, c, &cache, mp);
    auto grads = p.zero_like();
    Vec<double> dx, dhp, dcp;
    lstm_backward(p, cache, r_h, r_c, grads, dx, dhp, dcp, mp);

    std::vector<std::pair<std::string, Mat<double>*>> params;
    std::vector<std::pair<std::string, const Mat<double>*>> analytic;
    p.for_each_mat([&](const char* n, Mat<double>& m) { params.emplace_back(n, &m); });
    grads.for_each_mat([&](const char* n, Mat<double>& m) { analytic.emplace_back(n, &m); });
    auto rep = oracle::fd_check<double>(params, analytic, forward, 1e-6, 1e-3);
    return rep.max_err;
}

double gru_fd_max_err(GruReading reading, Index D, Index H, std::uint64_t seed,
                      bool with_masks = false) {
    Rng rng(seed);
    auto p = GruParams<double>::shaped(D, H, reading);
    randomize(p, rng);
    Vec<double> x = random_vec(D, rng), h0 = random_vec(H, rng);
    Vec<double> r_h(H);
    for (auto& v : r_h) v = rng.uniform(0.5, 1.5);

    GruMasks<double> masks;
    if (with_masks) {
        Rng mrng(mix_seed(seed, 7));
        masks.active = true;
        masks.r = make_dropout_mask<double>(H, 0.4, mrng);
        masks.z = make_dropout_mask<double>(H, 0.4, mrng);
        masks.h = make_dropout_mask<double>(H, 0.4, mrng);
    }
    const GruMasks<double>* mp = with_masks ? &masks : nullptr;

    auto forward = [&]() {
        Vec<double> h;
        gru_step<double>(p, x, h0, h, nullptr, mp);
        return dot(h, r_h);
    };

    Vec<double> h;
    GruStepCache<double> cache;
    gru_step(p, x, h0, h, &cache, mp);
    auto grads = p.zero_like();
    Vec<double> dx, dhp;
    gru_backward(p, cache, r_h, grads, dx, dhp, mp);
    (void)h;

    std::vector<std::pair<std::string, Mat<double>*>> params;
    std::vector<std::pair<std::string, const Mat<double>*>> analytic;
    p.for_each_mat([&](const char* n, Mat<double>& m) { params.emplace_back(n, &m); });
    grads.for_each_mat([&](const char* n, Mat<double>& m) { analytic.emplace_back(n, &m); });
    auto rep = oracle::fd_check<double>(params, analytic, forward, 1e-6, 1e-3);
    return rep.max_err;
}

}  // namespace

TEST_CASE("lstm gradients match central finite differences") {
    CHECK(lstm_fd_max_err(GateActivation::AsPrinted, PeepholeMode::FullMatrix, 3, 4, 101) < 1e-6);
    CHECK(lstm_fd_max_err(GateActivation::Conventional, PeepholeMode::FullMatrix, 3, 4, 102) <
          1e-6);
    CHECK(lstm_fd_max_err(GateActivation::AsPrinted, PeepholeMode::Diagonal, 3, 4, 103) < 1e-6);
    CHECK(lstm_fd_max_err(GateActivation::Conventional, PeepholeMode::Diagonal, 3, 4, 104) <
          1e-6);
}

TEST_CASE("lstm gradients with variational recurrent masks match finite differences") {
    CHECK(lstm_fd_max_err(GateActivation::AsPrinted, PeepholeMode::FullMatrix, 3, 4, 105, true) <
          1e-6);
}

TEST_CASE("gru_step: zero parameters and zero state give zero output") {
    auto p = GruParams<double>::shaped(3, 4);
    Vec<double> x = {0.3, -0.4, 2.0}, h0(4, 0.0), h;
    gru_step(p, x, h0, h);
    for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("gru_step: closed update gate passes the previous state through") {
    Rng rng(21);
    auto p = GruParams<double>::shaped(3, 4);
    randomize(p, rng);
    p.b_z.fill(30.0);  // z ~ 1
    Vec<double> x = random_vec(3, rng), h0 = random_vec(4, rng), h;
    gru_step(p, x, h0, h);
    for (Index k = 0; k < 4; ++k) CHECK(h[k] == doctest::Approx(h0[k]).epsilon(1e-9));
}

TEST_CASE("gru gradients match central finite differences") {
    CHECK(gru_fd_max_err(GruReading::Standard, 3, 4, 201) < 1e-6);
    CHECK(gru_fd_max_err(GruReading::Swapped, 3, 4, 202) < 1e-6);
    CHECK(gru_fd_max_err(GruReading::Standard, 3, 4, 203, true) < 1e-6);
}

TEST_CASE("gru_backward: zero upstream gives zero gradients") {
    Rng rng(22);
    auto p = GruParams<double>::shaped(3, 4);
    randomize(p, rng);
    Vec<double> x = random_vec(3, rng), h0 = random_vec(4, rng), h;
    GruStepCache<double> cache;
    gru_step(p, x, h0, h, &cache);
    auto grads = p.zero_like();
    Vec<double> dh(4, 0.0), dx, dhp;
    gru_backward(p, cache, dh, grads, dx, dhp);
    grads.for_each_mat([&](const char*, Mat<double>& g) {
        for (double v : g.a) CHECK(v == 0.0);
    });
}

TEST_CASE("softmax of zero logits is uniform") {
    auto p = DenseParams<double>::shaped(4, 5);
    Vec<double> x(4, 0.7);
    p.W.zero();
    const auto probs = dense_softmax(p, x);
    for (double v : probs) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("softmax is invariant to a constant logit shift") {
    Rng rng(31);
    Vec<double> logits = random_vec(5, rng);
    Vec<double> shifted = logits;
    for (auto& v : shifted) v += 1000.0;
    const auto p1 = softmax(logits);
    const auto p2 = softmax(shifted);
    double sum = 0.0;
    for (Index i = 0; i < 5; ++i) {
        CHECK(std::abs(p1[i] - p2[i]) <= 1e-12);
        CHECK(p2[i] > 0.0);
        sum += p1[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("dense_tanh with identity weights evaluates tanh of the input") {
    auto p = DenseParams<double>::shaped(1, 1);
    p.W.a[0] = 1.0;
    const auto y = dense_tanh(p, {0.5});
    CHECK(y[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
    CHECK(y[0] == doctest::Approx(0.4621).epsilon(1e-4));
}

TEST_CASE("dense layers: gradients match finite differences") {
    Rng rng(32);
    auto p = DenseParams<double>::shaped(4, 3);
    randomize(p, rng);
    Vec<double> x = random_vec(4, rng);
    Vec<double> r(3);
    for (auto& v : r) v = rng.uniform(0.5, 1.5);

    SUBCASE("tanh") {
        auto forward = [&]() { return dot(dense_tanh(p, x), r); };
        const auto y = dense_tanh(p, x);
        auto grads = p.zero_like();
        Vec<double> dx;
        dense_tanh_backward(p, x, y, r, grads, dx);
        std::vector<std::pair<std::string, Mat<double>*>> params = {{"W", &p.W}, {"b", &p.b}};
        std::vector<std::pair<std::string, const Mat<double>*>> analytic = {{"W", &grads.W},
                                                                            {"b", &grads.b}};
        CHECK(oracle::fd_check<double>(params, analytic, forward, 1e-6, 1e-3).max_err < 1e-6);
    }
    SUBCASE("softmax") {
        auto forward = [&]() { return dot(dense_softmax(p, x), r); };
        const auto probs = dense_softmax(p, x);
        auto grads = p.zero_like();
        Vec<double> dx;
        dense_softmax_backward(p, x, probs, r, grads, dx);
        std::vector<std::pair<std::string, Mat<double>*>> params = {{"W", &p.W}, {"b", &p.b}};
        std::vector<std::pair<std::string, const Mat<double>*>> analytic = {{"W", &grads.W},
                                                                            {"b", &grads.b}};
        CHECK(oracle::fd_check<double>(params, analytic, forward, 1e-6, 1e-3).max_err < 1e-6);
    }
}

TEST_CASE("dropout mask: rate 0 is all ones") {
    Rng rng(41);
    const auto m = make_dropout_mask<double>(64, 0.0, rng);
    for (double v : m) CHECK(v == 1.0);
}

TEST_CASE("dropout mask: kept fraction and inverted scaling at rate 0.6") {
    Rng rng(42);
    const std::size_t n = 1000000;
    const auto m = make_dropout_mask<double>(n, 0.6, rng);
    std::size_t kept = 0;
    for (double v : m) {
        if (v != 0.0) {
            CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
            ++kept;
        }
    }
    const double fraction = static_cast<double>(kept) / static_cast<double>(n);
    CHECK(fraction == doctest::Approx(0.4).epsilon(0.005));
    CHECK(std::abs(fraction - 0.4) < 0.002);
}

TEST_CASE("dropout mask: same seed reproduces identical masks") {
    Rng a(43), b(43);
    const auto m1 = make_dropout_mask<double>(512, 0.6, a);
    const auto m2 = make_dropout_mask<double>(512, 0.6, b);
    CHECK(m1 == m2);
}

TEST_CASE("dropout mask: invalid rate is a config error") {
    Rng rng(44);
    CHECK_THROWS_AS(make_dropout_mask<double>(8, 1.0, rng), ConfigError);
    CHECK_THROWS_AS(make_dropout_mask<double>(8, -0.1, rng), ConfigError);
}

TEST_CASE("diagonal peepholes equal full-matrix peepholes with zero off-diagonals") {
    Rng rng(51);
    const Index D = 3, H = 4;
    auto full = LstmParams<double>::shaped(D, H, GateActivation::AsPrinted,
                                           PeepholeMode::FullMatrix);
    randomize(full, rng);
    // zero the off-diagonal peephole entries
    for (Mat<double>* m : {&full.W_ci, &full.W_cf, &full.W_co}) {
        for (Index i = 0; i < H; ++i)
            for (Index j = 0; j < H; ++j)
                if (i != j) (*m)(i, j) = 0.0;
    }
    auto diag = LstmParams<double>::shaped(D, H, GateActivation::AsPrinted,
                                           PeepholeMode::Diagonal);
    diag.W_xi = full.W_xi; diag.W_hi = full.W_hi; diag.b_i = full.b_i;
    diag.W_xf = full.W_xf; diag.W_hf = full.W_hf; diag.b_f = full.b_f;
    diag.W_xo = full.W_xo; diag.W_ho = full.W_ho; diag.b_o = full.b_o;
    diag.W_xc = full.W_xc; diag.W_hc = full.W_hc; diag.b_c = full.b_c;
    for (Index i = 0; i < H; ++i) {
        diag.W_ci.a[i] = full.W_ci(i, i);
        diag.W_cf.a[i] = full.W_cf(i, i);
        diag.W_co.a[i] = full.W_co(i, i);
    }

    Vec<double> x = random_vec(D, rng), h0 = random_vec(H, rng), c0 = random_vec(H, rng);
    Vec<double> h_full, c_full, h_diag, c_diag;
    lstm_step(full, x, h0, c0, h_full, c_full);
    lstm_step(diag, x, h0, c0, h_diag, c_diag);
    for (Index k = 0; k < H; ++k) {
        CHECK(std::abs(h_full[k] - h_diag[k]) <= 1e-12);
        CHECK(std::abs(c_full[k] - c_diag[k]) <= 1e-12);
    }
}

TEST_CASE("forward passes are deterministic given identical inputs") {
    Rng rng(61);
    auto p = LstmParams<double>::shaped(3, 4);
    randomize(p, rng);
    Vec<double> x = random_vec(3, rng), h0 = random_vec(4, rng), c0 = random_vec(4, rng);
    Vec<double> h1, c1, h2, c2;
    lstm_step(p, x, h0, c0, h1, c1);
    lstm_step(p, x, h0, c0, h2, c2);
    CHECK(h1 == h2);
    CHECK(c1 == c2);
}

TEST_CASE("shape errors name the offending matrix") {
    auto p = LstmParams<double>::shaped(3, 4);
    Vec<double> x(2, 0.0), h0(4, 0.0), c0(4, 0.0), h, c;
    CHECK_THROWS_WITH_AS(lstm_step(p, x, h0, c0, h, c),
                         doctest::Contains("lstm x_t"), ShapeError);
}

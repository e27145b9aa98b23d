#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/net/model.hpp"

namespace darnn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Standard bias-corrected Adam, no weight decay, no lr decay. Moment buffers
/// are keyed by tensor name so layers can be added or rebuilt without
/// disturbing each other's state.
template <class Real>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig& config() const { return cfg_; }
    long step_count() const { return step_; }

    void reset() {
        step_ = 0;
        m_.clear();
        v_.clear();
    }

    /// Applies one update from `grads` to `params`. A non-finite gradient
    /// aborts the step naming the offending tensor.
    void step(DaRnnModel<Real>& params, const DaRnnModel<Real>& grads) {
        // validate first so an abort leaves parameters untouched
        grads.for_each_param([&](const std::string& name, const Mat<Real>& g) {
            if (!all_finite(g.a.data(), g.size())) {
                throw NumericError("non-finite gradient in " + name);
            }
        });
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

        std::vector<std::pair<std::string, const Mat<Real>*>> gmats;
        grads.for_each_param([&](const std::string& name, const Mat<Real>& g) {
            gmats.emplace_back(name, &g);
        });
        std::size_t idx = 0;
        params.for_each_param([&](const std::string& name, Mat<Real>& p) {
            const Mat<Real>& g = *gmats[idx].second;
            if (gmats[idx].first != name || g.size() != p.size()) {
                throw ShapeError("optimizer/parameter mismatch at " + name);
            }
            ++idx;
            auto& m = m_[name];
            auto& v = v_[name];
            if (m.size() != p.size()) m.assign(p.size(), 0.0);
            if (v.size() != p.size()) v.assign(p.size(), 0.0);
            for (Index i = 0; i < p.size(); ++i) {
                const double gi = static_cast<double>(g.a[i]);
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p.a[i] -= static_cast<Real>(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        });
    }

private:
    AdamConfig cfg_;
    long step_ = 0;
    std::map<std::string, std::vector<double>> m_, v_;
};

/// Global-norm gradient clipping (off unless max_norm > 0).
template <class Real>
inline void clip_global_norm(DaRnnModel<Real>& grads, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    grads.for_each_param([&](const std::string&, const Mat<Real>& g) {
        for (Index i = 0; i < g.size(); ++i) {
            const double x = static_cast<double>(g.a[i]);
            sq += x * x;
        }
    });
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const Real scale = static_cast<Real>(max_norm / norm);
    grads.for_each_param([&](const std::string&, Mat<Real>& g) {
        for (auto& x : g.a) x *= scale;
    });
}

}  // namespace darnn

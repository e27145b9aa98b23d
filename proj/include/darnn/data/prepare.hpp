#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darnn/core/rng.hpp"
#include "darnn/data/observation.hpp"
#include "darnn/net/model.hpp"

namespace darnn {

/// A normalized observation converted to model input. `uid` (a stable hash of
/// the observation id) seeds per-sample dropout masks, so a sample draws the
/// same masks regardless of which batch it lands in.
template <class Real>
struct PreparedSample {
    SeqTensor<Real> x;
    int label = -1;  // -1 for unlabelled target samples
    std::uint64_t uid = 0;
    std::string id;
};

template <class Real>
inline SeqTensor<Real> to_seq_tensor(const SequenceObservation& obs) {
    if (obs.frames.empty()) throw SchemaError("observation " + obs.id + " has no frames");
    const Index T = obs.frames.size();
    const Index eta_w = obs.frames.front().eta.size();
    SeqTensor<Real> x;
    x.phi = Mat<Real>(T, kPhiDim);
    x.gamma = Mat<Real>(T, kGammaDim);
    x.eta = Mat<Real>(T, eta_w);
    for (Index t = 0; t < T; ++t) {
        const FrameFeatures& f = obs.frames[t];
        if (f.eta.size() != eta_w)
            throw SchemaError("observation " + obs.id + " frame " + std::to_string(t) +
                              " has inconsistent eta width");
        for (Index k = 0; k < kPhiDim; ++k) x.phi(t, k) = static_cast<Real>(f.phi[k]);
        for (Index k = 0; k < kGammaDim; ++k) x.gamma(t, k) = static_cast<Real>(f.gamma[k]);
        for (Index k = 0; k < eta_w; ++k) x.eta(t, k) = static_cast<Real>(f.eta[k]);
    }
    return x;
}

template <class Real>
inline PreparedSample<Real> prepare_sample(const SequenceObservation& obs) {
    PreparedSample<Real> s;
    s.x = to_seq_tensor<Real>(obs);
    s.label = obs.label.has_value() ? static_cast<int>(*obs.label) : -1;
    s.uid = fnv1a64(obs.id);
    s.id = obs.id;
    return s;
}

template <class Real>
inline std::vector<PreparedSample<Real>> prepare_samples(
    const std::vector<SequenceObservation>& seqs) {
    std::vector<PreparedSample<Real>> out;
    out.reserve(seqs.size());
    for (const auto& o : seqs) out.push_back(prepare_sample<Real>(o));
    return out;
}

}  // namespace darnn

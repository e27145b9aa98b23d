#pragma once

#include "darnn/core/error.hpp"
#include "darnn/core/mat.hpp"
#include "darnn/core/rng.hpp"

namespace darnn {

/// Inverted-dropout mask: entries are 0 with probability `rate`, else
/// 1/(1-rate). Recurrent (variational) masks are sampled once per sequence
/// and reused at every timestep; output masks are sampled per application.
/// At inference no mask is applied at all.
template <class Real>
inline Vec<Real> make_dropout_mask(Index n, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
    }
    Vec<Real> mask(n, Real(1));
    if (rate == 0.0) return mask;
    const Real keep = Real(1.0 / (1.0 - rate));
    for (Index i = 0; i < n; ++i) {
        mask[i] = rng.uniform() < rate ? Real(0) : keep;
    }
    return mask;
}

}  // namespace darnn

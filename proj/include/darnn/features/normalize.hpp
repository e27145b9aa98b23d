#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/data/observation.hpp"

namespace darnn {

/// Z-score statistics over the flat per-frame feature vector
/// [phi(13) | gamma(8) | eta(w)]. One-hot gaze slots and the boolean
/// environment flags pass through unscaled, as does any zero-variance slot.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<std::uint8_t> passthrough;
    std::vector<std::string> notes;

    std::size_t width() const { return mean.size(); }

    /// Stable content hash; stored in checkpoint manifests.
    std::string id() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&](double v) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            std::memcpy(&bits, &v, sizeof(bits));
            h ^= bits;
            h *= 0x100000001b3ULL;
        };
        for (double v : mean) mix(v);
        for (double v : stddev) mix(v);
        for (auto p : passthrough) {
            h ^= p;
            h *= 0x100000001b3ULL;
        }
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

namespace detail {

inline std::vector<double> flat_features(const FrameFeatures& f) {
    std::vector<double> v;
    v.reserve(kPhiDim + kGammaDim + f.eta.size());
    v.insert(v.end(), f.phi.begin(), f.phi.end());
    v.insert(v.end(), f.gamma.begin(), f.gamma.end());
    v.insert(v.end(), f.eta.begin(), f.eta.end());
    return v;
}

inline void unflatten_features(const std::vector<double>& v, FrameFeatures& f) {
    for (std::size_t i = 0; i < kPhiDim; ++i) f.phi[i] = v[i];
    for (std::size_t i = 0; i < kGammaDim; ++i) f.gamma[i] = v[kPhiDim + i];
    for (std::size_t i = 0; i < f.eta.size(); ++i) f.eta[i] = v[kPhiDim + kGammaDim + i];
}

}  // namespace detail

/// Fits z-score stats over all frames of the given sequences jointly.
inline NormStats fit_normalization(const std::vector<SequenceObservation>& seqs) {
    if (seqs.empty()) throw ConfigError("fit_normalization: empty training set");
    const std::size_t eta_w = seqs.front().frames.front().eta.size();
    const std::size_t width = kPhiDim + kGammaDim + eta_w;

    NormStats s;
    s.mean.assign(width, 0.0);
    s.stddev.assign(width, 1.0);
    s.passthrough.assign(width, 0);
    // gaze one-hot slots
    for (std::size_t i = kPhiDim; i < kPhiDim + kGammaDim; ++i) s.passthrough[i] = 1;
    // lane_left, lane_right, intersection flags
    for (std::size_t i = 0; i < 3 && i < eta_w; ++i) s.passthrough[kPhiDim + kGammaDim + i] = 1;

    std::vector<double> sum(width, 0.0), sumsq(width, 0.0);
    std::size_t n = 0;
    for (const auto& seq : seqs) {
        for (const auto& fr : seq.frames) {
            const auto v = detail::flat_features(fr);
            if (v.size() != width)
                throw SchemaError("fit_normalization: inconsistent feature width");
            for (std::size_t i = 0; i < width; ++i) {
                sum[i] += v[i];
                sumsq[i] += v[i] * v[i];
            }
            ++n;
        }
    }
    for (std::size_t i = 0; i < width; ++i) {
        if (s.passthrough[i]) continue;
        const double mean = sum[i] / static_cast<double>(n);
        const double var = sumsq[i] / static_cast<double>(n) - mean * mean;
        const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
        if (sd <= 0.0) {
            s.passthrough[i] = 1;
            s.notes.push_back("feature slot " + std::to_string(i) +
                              " has zero variance; passed through");
            continue;
        }
        s.mean[i] = mean;
        s.stddev[i] = sd;
    }
    return s;
}

/// Applies fitted statistics. Not idempotent by construction; pipelines must
/// normalize exactly once.
inline std::vector<SequenceObservation> apply_normalization(
    const NormStats& stats, const std::vector<SequenceObservation>& seqs) {
    std::vector<SequenceObservation> out = seqs;
    for (auto& seq : out) {
        for (auto& fr : seq.frames) {
            auto v = detail::flat_features(fr);
            if (v.size() != stats.width())
                throw SchemaError("apply_normalization: feature width " +
                                  std::to_string(v.size()) + " does not match stats width " +
                                  std::to_string(stats.width()));
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!stats.passthrough[i]) v[i] = (v[i] - stats.mean[i]) / stats.stddev[i];
            }
            detail::unflatten_features(v, fr);
        }
    }
    return out;
}

}  // namespace darnn

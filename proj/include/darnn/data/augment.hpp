#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/data/observation.hpp"

namespace darnn {

struct AugmentResult {
    std::vector<SequenceObservation> samples;  // originals followed by subsequences
    std::size_t skipped_short = 0;             // parents too short to subsample
};

/// Training-set augmentation by suffix subsequences: every subsequence ends at
/// the parent's final frame (the manoeuvre onset), with random length drawn
/// uniformly from [51, min(149, L-1)]. Under-represented classes receive more
/// subsamples until every class reaches `target_per_class`; originals are
/// retained and frames are never altered, only suffix windows selected.
inline AugmentResult augment_subsequences(const std::vector<SequenceObservation>& train,
                                          std::size_t target_per_class, Rng& rng) {
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (!train[i].label.has_value())
            throw SchemaError("augment_subsequences: unlabelled sample " + train[i].id);
        by_class[static_cast<int>(*train[i].label)].push_back(i);
    }
    std::size_t max_count = 0;
    for (const auto& v : by_class) max_count = std::max(max_count, v.size());
    if (target_per_class == 0) target_per_class = 2 * max_count;
    if (target_per_class < max_count) {
        throw ConfigError("augment target " + std::to_string(target_per_class) +
                          " is below the largest class count " + std::to_string(max_count));
    }

    AugmentResult res;
    res.samples = train;
    for (int cls = 0; cls < static_cast<int>(kNumClasses); ++cls) {
        const auto& members = by_class[cls];
        if (members.empty()) continue;

        std::vector<std::size_t> eligible;
        for (std::size_t i : members) {
            if (train[i].frames.size() >= 52) eligible.push_back(i);
        }
        std::size_t need = target_per_class - members.size();
        if (!eligible.empty()) {
            std::size_t k = 0;
            for (std::size_t made = 0; made < need; ++made, ++k) {
                const SequenceObservation& parent = train[eligible[k % eligible.size()]];
                const long lmax = std::min<long>(149, static_cast<long>(parent.frames.size()) - 1);
                const long t_sub = rng.uniform_int(51, lmax);
                SequenceObservation sub;
                sub.id = parent.id + "#a" + std::to_string(made);
                sub.driver_id = parent.driver_id;
                sub.domain = parent.domain;
                sub.label = parent.label;
                sub.frames.assign(parent.frames.end() - t_sub, parent.frames.end());
                res.samples.push_back(std::move(sub));
            }
        } else if (need > 0) {
            res.skipped_short += members.size();
        }
    }
    return res;
}

}  // namespace darnn

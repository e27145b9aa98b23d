#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/core/rng.hpp"
#include "darnn/data/observation.hpp"

namespace darnn {

/// One leave-one-driver-out split. Index vectors point into the dataset the
/// split was built from. The held-out driver's samples form the target
/// domain; a reserved fraction of them is never used for (unlabelled)
/// adversarial training and serves as the test set.
struct LodoSplit {
    std::string held_out_driver;
    std::vector<std::size_t> source;        // all samples of the other drivers
    std::vector<std::size_t> target_train;  // held-out driver, training portion
    std::vector<std::size_t> target_test;   // held-out driver, reserved test portion
};

struct LodoSplits {
    std::vector<LodoSplit> splits;
    std::vector<std::string> warnings;
};

inline LodoSplits lodo_splits(const std::vector<SequenceObservation>& dataset,
                              double target_test_fraction = 0.3, std::uint64_t seed = 17) {
    if (target_test_fraction <= 0.0 || target_test_fraction >= 1.0)
        throw ConfigError("target_test_fraction must be in (0,1)");
    std::map<std::string, std::vector<std::size_t>> by_driver;
    for (std::size_t i = 0; i < dataset.size(); ++i) by_driver[dataset[i].driver_id].push_back(i);
    if (by_driver.size() < 2)
        throw ConfigError("lodo_splits needs at least 2 distinct drivers, got " +
                          std::to_string(by_driver.size()));

    LodoSplits out;
    for (const auto& [driver, members] : by_driver) {
        if (members.size() < 4) {
            out.warnings.push_back("driver " + driver + " has only " +
                                   std::to_string(members.size()) +
                                   " samples; not held out");
            continue;
        }
        LodoSplit split;
        split.held_out_driver = driver;
        for (const auto& [other, other_members] : by_driver) {
            if (other == driver) continue;
            split.source.insert(split.source.end(), other_members.begin(), other_members.end());
        }
        std::sort(split.source.begin(), split.source.end());

        std::vector<std::size_t> held = members;
        Rng rng(mix_seed(seed, fnv1a64(driver)));
        rng.shuffle(held);
        std::size_t n_test = static_cast<std::size_t>(
            std::max(1.0, std::floor(target_test_fraction * static_cast<double>(held.size()) + 0.5)));
        n_test = std::min(n_test, held.size() - 1);
        split.target_test.assign(held.begin(), held.begin() + n_test);
        split.target_train.assign(held.begin() + n_test, held.end());
        std::sort(split.target_test.begin(), split.target_test.end());
        std::sort(split.target_train.begin(), split.target_train.end());
        out.splits.push_back(std::move(split));
    }
    if (out.splits.empty()) throw ConfigError("no driver has enough samples to be held out");
    return out;
}

/// Deterministic index split helper (validation carve-outs, test sets).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double second_fraction, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    std::size_t n_second = static_cast<std::size_t>(
        std::max(1.0, std::floor(second_fraction * static_cast<double>(n) + 0.5)));
    n_second = std::min(n_second, n - 1);
    std::vector<std::size_t> first(idx.begin(), idx.end() - n_second);
    std::vector<std::size_t> second(idx.end() - n_second, idx.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {first, second};
}

}  // namespace darnn

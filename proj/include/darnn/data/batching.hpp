#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/core/rng.hpp"

namespace darnn {

/// Per-epoch shuffle shared by the supervised and adversarial trainers, so
/// runs with aligned seeds see the source set in the same order.
inline std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t run_seed,
                                                  int epoch) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(mix_seed(run_seed, fnv1a64("shuffle"), static_cast<std::uint64_t>(epoch)));
    rng.shuffle(idx);
    return idx;
}

/// Cycles target indices across batches and epochs, reshuffling at every
/// wrap, so target samples are reused while each cycle covers the whole set.
class TargetCycler {
public:
    TargetCycler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {
        if (n_ == 0) throw ConfigError("adversarial batching requires a non-empty target set");
        refill();
    }

    std::size_t size() const { return n_; }

    std::size_t next() {
        if (pos_ == order_.size()) refill();
        return order_[pos_++];
    }

private:
    void refill() {
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        Rng rng(mix_seed(seed_, fnv1a64("target-cycle"), cycle_));
        rng.shuffle(order_);
        ++cycle_;
        pos_ = 0;
    }

    std::size_t n_;
    std::uint64_t seed_;
    std::uint64_t cycle_ = 0;
    std::size_t pos_ = 0;
    std::vector<std::size_t> order_;
};

struct AdversarialBatchIdx {
    std::vector<std::size_t> source;
    std::vector<std::size_t> target;
};

/// One epoch of mixed batches: every source index exactly once (shuffled),
/// each batch half source and half target (the target half drawn from the
/// cycler). A short final source chunk gets an equally short target half.
inline std::vector<AdversarialBatchIdx> make_adversarial_batches(std::size_t n_source,
                                                                 TargetCycler& targets,
                                                                 int batch_size,
                                                                 std::uint64_t run_seed,
                                                                 int epoch) {
    if (batch_size < 2 || batch_size % 2 != 0) {
        throw ConfigError("adversarial batch size must be even and >= 2, got " +
                          std::to_string(batch_size));
    }
    const std::size_t half = static_cast<std::size_t>(batch_size) / 2;
    const auto perm = epoch_permutation(n_source, run_seed, epoch);
    std::vector<AdversarialBatchIdx> batches;
    for (std::size_t start = 0; start < perm.size(); start += half) {
        AdversarialBatchIdx b;
        const std::size_t end = std::min(start + half, perm.size());
        b.source.assign(perm.begin() + start, perm.begin() + end);
        b.target.reserve(b.source.size());
        for (std::size_t i = 0; i < b.source.size(); ++i) b.target.push_back(targets.next());
        batches.push_back(std::move(b));
    }
    return batches;
}

}  // namespace darnn

#pragma once

#include <cstdint>
#include <vector>

#include "darnn/loss/losses.hpp"
#include "darnn/net/model.hpp"

namespace darnn {

/// One slot of a (possibly mixed-domain) mini-batch. `loss_weight` is the
/// boolean manoeuvre-loss mask: 1 for labelled source samples, 0 for target
/// samples hidden from the manoeuvre classifier. `uid` seeds the sample's
/// dropout masks so a sample draws the same masks regardless of batch
/// composition.
template <class Real>
struct BatchSample {
    const SeqTensor<Real>* x = nullptr;
    int label = 0;
    int loss_weight = 1;
    int domain_label = 0;  // source=0, target=1
    std::uint64_t uid = 0;
};

template <class Real>
struct BatchOptions {
    bool train_mode = true;
    bool adversarial = false;
    double lambda = 1.10;
    double decay_rate = 0.9;
    std::uint64_t mask_seed = 0;  // combined with each sample's uid
};

struct BatchStats {
    double loss_y = 0.0;      // mean anticipation loss over weight-1 samples
    double loss_d = 0.0;      // mean domain loss over the whole batch
    double loss_total = 0.0;  // loss_y - lambda * loss_d
    long clamp_events = 0;
    int domain_correct = 0;
    int n_source = 0;
    int n = 0;
};

/// Single forward- and back-pass over a mixed batch: the manoeuvre loss is
/// computed only for weight-1 samples (masked mean), the domain loss over
/// every sample, and the feature extractor receives the domain gradient
/// through the reversal layer. With lambda == 0 the adversarial branch is
/// silenced exactly: no domain gradient reaches shared parameters.
template <class Real>
inline BatchStats full_forward_backward(const DaRnnModel<Real>& model,
                                        const std::vector<BatchSample<Real>>& batch,
                                        const BatchOptions<Real>& opt,
                                        DaRnnModel<Real>& grads) {
    BatchStats stats;
    stats.n = static_cast<int>(batch.size());
    for (const auto& s : batch)
        if (s.loss_weight != 0) ++stats.n_source;
    if (opt.adversarial) {
        bool any_target = false;
        for (const auto& s : batch) any_target |= s.domain_label == 1;
        if (!any_target) throw ConfigError("adversarial batch contains no target samples");
    }

    const double y_scale = stats.n_source > 0 ? 1.0 / stats.n_source : 0.0;
    const double d_scale = stats.n > 0 ? 1.0 / stats.n : 0.0;
    const AnticipationLossConfig loss_cfg{opt.decay_rate};

    for (const auto& s : batch) {
        const std::uint64_t sample_seed = mix_seed(opt.mask_seed, s.uid);
        const ExtractorCache<Real> cache = extractor_forward(
            model, *s.x, opt.train_mode ? RunMode::Train : RunMode::Infer, sample_seed);
        const Index T = cache.zd.rows;
        Mat<Real> dzd(T, model.cfg.fusion_width);

        if (s.loss_weight != 0) {
            const Mat<Real> probs = maneuver_probs(model, cache.zd);
            AnticipationLossResult<Real> ar =
                anticipation_loss(probs, static_cast<Index>(s.label), loss_cfg);
            stats.loss_y += ar.loss * y_scale;
            stats.clamp_events += ar.clamp_events;
            for (auto& g : ar.dlogits.a) g = static_cast<Real>(static_cast<double>(g) * y_scale);
            maneuver_head_backward(model, cache.zd, ar.dlogits, grads, dzd);
        }

        if (opt.adversarial) {
            auto domain_sample = [&](Index t) {
                Vec<Real> z(model.cfg.fusion_width);
                for (Index k = 0; k < model.cfg.fusion_width; ++k) z[k] = cache.zd(t, k);
                return domain_head_forward(model, z);
            };
            const std::vector<Index> steps = model.cfg.domain_per_timestep
                                                 ? [&] {
                                                       std::vector<Index> v(T);
                                                       for (Index t = 0; t < T; ++t) v[t] = t;
                                                       return v;
                                                   }()
                                                 : std::vector<Index>{T - 1};
            const double step_scale = d_scale / static_cast<double>(steps.size());
            double p_mean = 0.0;
            for (Index t : steps) {
                const DomainHeadCache<Real> dc = domain_sample(t);
                const DomainLossResult dr = domain_loss(dc.p, s.domain_label);
                stats.loss_d += dr.loss * step_scale;
                stats.clamp_events += dr.clamp_events;
                p_mean += dc.p / static_cast<double>(steps.size());
                // Head parameters always receive their own (un-reversed)
                // gradient; the reversed flow into the extractor is skipped
                // entirely at lambda == 0 so the branch is silenced bit-exactly.
                Vec<Real> dz;
                domain_head_backward(model, dc, dr.dlogit * step_scale, opt.lambda, grads, dz);
                if (opt.lambda != 0.0) {
                    for (Index k = 0; k < model.cfg.fusion_width; ++k) dzd(t, k) += dz[k];
                }
            }
            const int prediction = p_mean >= 0.5 ? 1 : 0;
            if (prediction == s.domain_label) ++stats.domain_correct;
        }

        // nothing flows back into the extractor for a masked sample when the
        // adversarial branch is off or silenced
        const bool any_upstream =
            s.loss_weight != 0 || (opt.adversarial && opt.lambda != 0.0);
        if (any_upstream) extractor_backward(model, cache, dzd, grads);
    }

    stats.loss_total = total_loss(stats.loss_y, stats.loss_d, opt.lambda);
    return stats;
}

}  // namespace darnn

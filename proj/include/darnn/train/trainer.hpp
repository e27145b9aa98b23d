#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/data/batching.hpp"
#include "darnn/data/prepare.hpp"
#include "darnn/eval/anticipate.hpp"
#include "darnn/eval/metrics.hpp"
#include "darnn/net/batch.hpp"
#include "darnn/net/model.hpp"
#include "darnn/train/adam.hpp"

namespace darnn {

enum class EarlyStopMetric { Loss, F1 };

struct TrainConfig {
    int batch_size = 128;
    int max_epochs = 200;
    int patience = 80;
    std::uint64_t seed = 42;
    double lambda = 1.10;
    int lambda_warmup_epochs = 0;  // 0 = fixed lambda (default); else linear ramp 0 -> lambda
    AdamConfig adam;
    double decay_rate = 0.9;
    double grad_clip_norm = 0.0;  // 0 = off
    EarlyStopMetric early_stop_metric = EarlyStopMetric::Loss;
    double p_th = 0.9;  // threshold used by the F1 early-stop metric

    void validate() const {
        if (patience < 1) throw ConfigError("patience must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
        if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    }
};

struct EpochRecord {
    int epoch = 0;
    double loss_y = 0.0;
    double loss_d = 0.0;
    double val_loss = 0.0;
    double domain_accuracy = 0.0;
    long clamp_events = 0;
    double wall_seconds = 0.0;
};

using History = std::vector<EpochRecord>;

struct TrainResult {
    History history;
    int best_epoch = -1;
    double best_val = 0.0;
    std::vector<std::string> warnings;
};

/// Mean anticipation loss over a sample set in inference mode.
template <class Real>
inline double eval_anticipation_loss(const DaRnnModel<Real>& model,
                                     const std::vector<PreparedSample<Real>>& samples,
                                     double decay_rate) {
    if (samples.empty()) return 0.0;
    const AnticipationLossConfig cfg{decay_rate};
    double sum = 0.0;
    for (const auto& s : samples) {
        const auto cache = extractor_forward(model, s.x, RunMode::Infer);
        const auto probs = maneuver_probs(model, cache.zd);
        sum += anticipation_loss(probs, static_cast<Index>(s.label), cfg).loss;
    }
    return sum / static_cast<double>(samples.size());
}

template <class Real>
inline double eval_f1(const DaRnnModel<Real>& model,
                      const std::vector<PreparedSample<Real>>& samples, double p_th) {
    std::vector<AnticipationResult> results;
    std::vector<Maneuver> truth;
    for (const auto& s : samples) {
        results.push_back(anticipate(model, s.x, p_th));
        truth.push_back(static_cast<Maneuver>(s.label));
    }
    return compute_metrics(results, truth).f1;
}

namespace detail {

/// Early-stopping score (lower is better). The F1 metric tie-breaks on the
/// validation loss so that patience is not exhausted while F1 sits on a
/// plateau (typically 0 before the model develops threshold-level
/// confidence) although the loss is still improving.
template <class Real>
inline double validation_score(const DaRnnModel<Real>& model,
                               const std::vector<PreparedSample<Real>>& val,
                               const TrainConfig& cfg, double* val_loss_out) {
    const double loss = eval_anticipation_loss(model, val, cfg.decay_rate);
    *val_loss_out = loss;
    if (cfg.early_stop_metric == EarlyStopMetric::F1) {
        return (1.0 - eval_f1(model, val, cfg.p_th)) + 1e-3 * loss;
    }
    return loss;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Supervised training on labelled samples: minimizes the anticipation loss,
/// tracks validation loss per epoch, early-stops after `patience`
/// non-improving epochs and restores the best-validation parameters.
template <class Real>
inline TrainResult train_supervised(DaRnnModel<Real>& model,
                                    const std::vector<PreparedSample<Real>>& train,
                                    const std::vector<PreparedSample<Real>>& val,
                                    const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw ConfigError("train_supervised: empty training set");
    if (val.empty())
        throw ConfigError("train_supervised: empty validation set, early stopping impossible");
    for (const auto& s : train)
        if (s.label < 0) throw SchemaError("train_supervised: unlabelled sample " + s.id);

    TrainResult result;
    Adam<Real> adam(cfg.adam);
    DaRnnModel<Real> best = model;
    double best_score = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto perm = epoch_permutation(train.size(), cfg.seed, epoch);
        BatchOptions<Real> opt;
        opt.train_mode = true;
        opt.adversarial = false;
        opt.decay_rate = cfg.decay_rate;
        opt.mask_seed = mix_seed(cfg.seed, fnv1a64("mask"), static_cast<std::uint64_t>(epoch));

        double loss_y = 0.0;
        long clamp = 0;
        std::size_t n_batches = 0;
        const std::size_t bsz = static_cast<std::size_t>(cfg.batch_size);
        for (std::size_t start = 0; start < perm.size(); start += bsz) {
            const std::size_t end = std::min(start + bsz, perm.size());
            std::vector<BatchSample<Real>> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const auto& s = train[perm[i]];
                batch.push_back({&s.x, s.label, 1, 0, s.uid});
            }
            auto grads = model.zero_like();
            const auto stats = full_forward_backward(model, batch, opt, grads);
            loss_y += stats.loss_y;
            clamp += stats.clamp_events;
            ++n_batches;
            clip_global_norm(grads, cfg.grad_clip_norm);
            adam.step(model, grads);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss_y = loss_y / static_cast<double>(n_batches);
        rec.clamp_events = clamp;
        const double score = detail::validation_score(model, val, cfg, &rec.val_loss);
        rec.wall_seconds = detail::seconds_since(t0);
        result.history.push_back(rec);

        if (score < best_score) {
            best_score = score;
            best = model;
            result.best_epoch = epoch;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
            if (bad_epochs >= cfg.patience) break;
        }
    }
    model = best;
    result.best_val = best_score;
    return result;
}

/// Domain-adversarial training: mixed half source / half target batches,
/// manoeuvre loss masked to source, domain labels 0/1, early stopping on the
/// source validation loss. Target samples cycle with per-cycle reshuffles.
template <class Real>
inline TrainResult train_adversarial(DaRnnModel<Real>& model,
                                     const std::vector<PreparedSample<Real>>& source,
                                     const std::vector<PreparedSample<Real>>& target,
                                     const std::vector<PreparedSample<Real>>& val_source,
                                     const TrainConfig& cfg) {
    cfg.validate();
    if (source.empty()) throw ConfigError("train_adversarial: empty source set");
    if (target.empty()) throw ConfigError("train_adversarial: empty target set");
    if (val_source.empty())
        throw ConfigError("train_adversarial: empty validation set, early stopping impossible");
    for (const auto& s : source)
        if (s.label < 0) throw SchemaError("train_adversarial: unlabelled source sample " + s.id);

    TrainResult result;
    if (target.size() > source.size()) {
        result.warnings.push_back("target set (" + std::to_string(target.size()) +
                                  ") larger than source set (" + std::to_string(source.size()) +
                                  ")");
    }

    Adam<Real> adam(cfg.adam);
    TargetCycler cycler(target.size(), cfg.seed);
    DaRnnModel<Real> best = model;
    double best_score = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;
    const auto t0 = std::chrono::steady_clock::now();

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double lambda = cfg.lambda;
        if (cfg.lambda_warmup_epochs > 0) {
            const double ramp = std::min(1.0, static_cast<double>(epoch + 1) /
                                                  static_cast<double>(cfg.lambda_warmup_epochs));
            lambda = cfg.lambda * ramp;
        }
        const auto batches =
            make_adversarial_batches(source.size(), cycler, cfg.batch_size, cfg.seed, epoch);

        BatchOptions<Real> opt;
        opt.train_mode = true;
        opt.adversarial = true;
        opt.lambda = lambda;
        opt.decay_rate = cfg.decay_rate;
        opt.mask_seed = mix_seed(cfg.seed, fnv1a64("mask"), static_cast<std::uint64_t>(epoch));

        double loss_y = 0.0, loss_d = 0.0;
        long clamp = 0;
        int domain_correct = 0, domain_total = 0;
        for (const auto& bidx : batches) {
            std::vector<BatchSample<Real>> batch;
            batch.reserve(bidx.source.size() + bidx.target.size());
            for (std::size_t i : bidx.source) {
                const auto& s = source[i];
                batch.push_back({&s.x, s.label, 1, 0, s.uid});
            }
            for (std::size_t i : bidx.target) {
                const auto& s = target[i];
                batch.push_back({&s.x, 0, 0, 1, s.uid});
            }
            auto grads = model.zero_like();
            const auto stats = full_forward_backward(model, batch, opt, grads);
            loss_y += stats.loss_y;
            loss_d += stats.loss_d;
            clamp += stats.clamp_events;
            domain_correct += stats.domain_correct;
            domain_total += stats.n;
            clip_global_norm(grads, cfg.grad_clip_norm);
            adam.step(model, grads);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss_y = loss_y / static_cast<double>(batches.size());
        rec.loss_d = loss_d / static_cast<double>(batches.size());
        rec.domain_accuracy =
            domain_total > 0 ? static_cast<double>(domain_correct) / domain_total : 0.0;
        rec.clamp_events = clamp;
        const double score = detail::validation_score(model, val_source, cfg, &rec.val_loss);
        rec.wall_seconds = detail::seconds_since(t0);
        result.history.push_back(rec);

        if (score < best_score) {
            best_score = score;
            best = model;
            result.best_epoch = epoch;
            bad_epochs = 0;
        } else {
            ++bad_epochs;
            if (bad_epochs >= cfg.patience) break;
        }
    }
    model = best;
    result.best_val = best_score;
    return result;
}

/// History file: one CSV record per epoch.
inline void write_history_csv(const std::string& path, const History& hist) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open history file for writing: " + path);
    out << "epoch,loss_y,loss_d,val_loss,domain_accuracy,clamp_events,wall_seconds\n";
    char line[256];
    for (const auto& r : hist) {
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.6g,%ld,%.3f\n", r.epoch, r.loss_y,
                      r.loss_d, r.val_loss, r.domain_accuracy, r.clamp_events, r.wall_seconds);
        out << line;
    }
}

}  // namespace darnn

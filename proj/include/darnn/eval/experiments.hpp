#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "darnn/data/augment.hpp"
#include "darnn/data/prepare.hpp"
#include "darnn/data/splits.hpp"
#include "darnn/eval/anticipate.hpp"
#include "darnn/eval/metrics.hpp"
#include "darnn/features/normalize.hpp"
#include "darnn/net/checkpoint.hpp"
#include "darnn/train/trainer.hpp"
#include "darnn/util/parallel.hpp"

namespace darnn {

struct ExperimentConfig {
    NetworkConfig net;
    TrainConfig train;
    double test_fraction = 0.15;
    int folds = 5;
    double val_fraction = 0.2;
    double target_test_fraction = 0.3;
    bool augment = true;
    std::size_t augment_target_per_class = 0;  // 0 = twice the largest class
    double p_th = 0.9;
    std::uint64_t seed = 7;  // protocol seed: splits, folds, augmentation
    int threads = 1;
    /// Learning-rate multiplier for the fine-tuned condition: fine-tuning a
    /// pre-trained extractor conventionally uses smaller steps than cold
    /// training so the donor features survive the adversarial phase.
    double fine_tune_lr_scale = 1.0;
    /// Whether the fine-tuned condition also transfers the manoeuvre head
    /// (the extractor always transfers; the domain head never does).
    bool fine_tune_include_head = false;
};

struct MetricsSummary {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double ttp = 0.0;
};

inline MetricsSummary summarize(const MetricsReport& r) {
    return {r.macro_precision, r.macro_recall, r.f1, r.mean_ttp};
}

inline MetricsSummary mean_of(const std::vector<MetricsSummary>& v) {
    MetricsSummary m;
    if (v.empty()) return m;
    for (const auto& s : v) {
        m.precision += s.precision;
        m.recall += s.recall;
        m.f1 += s.f1;
        m.ttp += s.ttp;
    }
    const double n = static_cast<double>(v.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.ttp /= n;
    return m;
}

/// Threshold anticipation over a sample set against a read-only model;
/// embarrassingly parallel, reduced in sample order.
template <class Real>
inline MetricsReport evaluate_model(const DaRnnModel<Real>& model,
                                    const std::vector<PreparedSample<Real>>& samples,
                                    double p_th, int threads = 1) {
    std::vector<AnticipationResult> results(samples.size());
    parallel_for(samples.size(), threads,
                 [&](std::size_t i) { results[i] = anticipate(model, samples[i].x, p_th); });
    std::vector<Maneuver> truth;
    truth.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.label < 0) throw SchemaError("evaluate_model: sample " + s.id + " has no label");
        truth.push_back(static_cast<Maneuver>(s.label));
    }
    return compute_metrics(results, truth);
}

namespace detail {

inline std::vector<SequenceObservation> take(const std::vector<SequenceObservation>& ds,
                                             const std::vector<std::size_t>& idx) {
    std::vector<SequenceObservation> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(ds[i]);
    return out;
}

inline Index eta_width_of(const std::vector<SequenceObservation>& ds) {
    if (ds.empty() || ds.front().frames.empty())
        throw SchemaError("dataset is empty or has empty frames");
    return ds.front().frames.front().eta.size();
}

inline std::vector<SequenceObservation> maybe_augment(std::vector<SequenceObservation> train,
                                                      const ExperimentConfig& cfg,
                                                      std::uint64_t salt,
                                                      std::vector<std::string>* warnings) {
    if (!cfg.augment) return train;
    bool any_long = false;
    for (const auto& s : train) any_long |= s.frames.size() >= 52;
    if (!any_long) {
        if (warnings != nullptr)
            warnings->push_back("augmentation skipped: all sequences shorter than 52 frames");
        return train;
    }
    Rng rng(mix_seed(cfg.seed, fnv1a64("augment"), salt));
    auto res = augment_subsequences(train, cfg.augment_target_per_class, rng);
    if (res.skipped_short > 0 && warnings != nullptr) {
        warnings->push_back(std::to_string(res.skipped_short) +
                            " sequences too short to subsample");
    }
    return std::move(res.samples);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment 1: shuffled-driver anticipation with k-fold cross validation.
// ---------------------------------------------------------------------------

struct Exp1Result {
    MetricsReport test_report;
    std::vector<double> fold_val_losses;
    int best_fold = -1;
    std::vector<std::string> test_ids;  // protocol audit: test isolation
    std::vector<std::string> pool_ids;
    std::vector<std::string> warnings;
};

/// 15% held-out test split; k-fold cross validation on the remainder with
/// augmentation and class balancing applied to the train folds only;
/// normalization fitted jointly on the pool (never on test data); the
/// fold-best model is evaluated on the test split.
inline Exp1Result run_experiment_1(const std::vector<SequenceObservation>& dataset,
                                   const ExperimentConfig& cfg) {
    if (dataset.size() < static_cast<std::size_t>(cfg.folds) + 2)
        throw ConfigError("dataset too small for experiment 1");
    for (const auto& s : dataset)
        if (!s.label.has_value()) throw SchemaError("experiment 1 requires labels: " + s.id);

    Exp1Result out;
    auto [pool_idx, test_idx] =
        split_indices(dataset.size(), cfg.test_fraction, mix_seed(cfg.seed, fnv1a64("test")));
    auto pool = detail::take(dataset, pool_idx);
    auto test = detail::take(dataset, test_idx);
    for (const auto& s : test) out.test_ids.push_back(s.id);
    for (const auto& s : pool) out.pool_ids.push_back(s.id);

    const NormStats stats = fit_normalization(pool);
    pool = apply_normalization(stats, pool);
    test = apply_normalization(stats, test);

    NetworkConfig net = cfg.net;
    net.eta_dim = detail::eta_width_of(dataset);

    std::vector<std::size_t> fold_order(pool.size());
    for (std::size_t i = 0; i < fold_order.size(); ++i) fold_order[i] = i;
    Rng fold_rng(mix_seed(cfg.seed, fnv1a64("folds")));
    fold_rng.shuffle(fold_order);

    DaRnnModel<double> best_model = DaRnnModel<double>::shaped(net);
    double best_val = std::numeric_limits<double>::infinity();
    for (int fold = 0; fold < cfg.folds; ++fold) {
        std::vector<SequenceObservation> train_obs, val_obs;
        for (std::size_t i = 0; i < fold_order.size(); ++i) {
            const bool in_val =
                i % static_cast<std::size_t>(cfg.folds) == static_cast<std::size_t>(fold);
            (in_val ? val_obs : train_obs).push_back(pool[fold_order[i]]);
        }
        train_obs = detail::maybe_augment(std::move(train_obs), cfg,
                                          static_cast<std::uint64_t>(fold), &out.warnings);

        auto train = prepare_samples<double>(train_obs);
        auto val = prepare_samples<double>(val_obs);
        auto model = DaRnnModel<double>::build(net, mix_seed(cfg.train.seed, fold));
        TrainConfig tc = cfg.train;
        tc.seed = mix_seed(cfg.train.seed, fnv1a64("fold"), fold);
        const auto res = train_supervised(model, train, val, tc);
        out.fold_val_losses.push_back(res.best_val);
        if (res.best_val < best_val) {
            best_val = res.best_val;
            best_model = model;
            out.best_fold = fold;
        }
    }

    out.test_report = evaluate_model(best_model, prepare_samples<double>(test), cfg.p_th,
                                     cfg.threads);
    return out;
}

// ---------------------------------------------------------------------------
// Experiments 2 and 3: domain adaptation (LODO and cross-dataset).
// ---------------------------------------------------------------------------

enum class AdaptCondition { NoAdaptation, Adversarial, AdversarialFineTuned };

struct AdaptationRun {
    MetricsReport no_adapt, da, da_ft;
};

namespace detail {

/// Shared engine for the three conditions of experiments 2/3: (a) supervised
/// source-only baseline, (b) adversarial with unlabelled target, (c) the same
/// with the extractor fine-tuned from (a)'s model. All three are evaluated on
/// the identical target test set.
inline AdaptationRun run_adaptation_conditions(const std::vector<SequenceObservation>& source_obs,
                                               const std::vector<SequenceObservation>& tgt_train_obs,
                                               const std::vector<SequenceObservation>& tgt_test_obs,
                                               const ExperimentConfig& cfg, std::uint64_t salt,
                                               std::vector<std::string>* warnings) {
    NetworkConfig net = cfg.net;
    net.eta_dim = eta_width_of(source_obs);

    const NormStats stats = fit_normalization(source_obs);
    auto source_n = apply_normalization(stats, source_obs);
    auto tgt_train_n = apply_normalization(stats, tgt_train_obs);  // source-fitted stats
    auto tgt_test_n = apply_normalization(stats, tgt_test_obs);

    auto [train_idx, val_idx] = split_indices(
        source_n.size(), cfg.val_fraction, mix_seed(cfg.seed, fnv1a64("val"), salt));
    auto train_obs = take(source_n, train_idx);
    const auto val_obs = take(source_n, val_idx);
    train_obs = maybe_augment(std::move(train_obs), cfg, salt, warnings);

    const auto train = prepare_samples<double>(train_obs);
    const auto val = prepare_samples<double>(val_obs);
    const auto tgt_train = prepare_samples<double>(tgt_train_n);
    const auto tgt_test = prepare_samples<double>(tgt_test_n);

    AdaptationRun run;

    // (a) no adaptation
    auto model_a = DaRnnModel<double>::build(net, mix_seed(cfg.train.seed, salt, 0xA));
    TrainConfig tc_a = cfg.train;
    tc_a.seed = mix_seed(cfg.train.seed, salt, 0xA0);
    train_supervised(model_a, train, val, tc_a);
    run.no_adapt = evaluate_model(model_a, tgt_test, cfg.p_th, cfg.threads);

    // (b) adversarial, cold start
    auto model_b = DaRnnModel<double>::build(net, mix_seed(cfg.train.seed, salt, 0xB));
    TrainConfig tc_b = cfg.train;
    tc_b.seed = mix_seed(cfg.train.seed, salt, 0xB0);
    train_adversarial(model_b, train, tgt_train, val, tc_b);
    run.da = evaluate_model(model_b, tgt_test, cfg.p_th, cfg.threads);

    // (c) adversarial with the extractor pre-trained on the source domain;
    // condition (a)'s model is exactly that pre-training run. Only the
    // extractor transfers; both heads start fresh.
    auto model_c = DaRnnModel<double>::build(net, mix_seed(cfg.train.seed, salt, 0xC));
    fine_tune_init(model_c, checkpoint_from_model(model_a), cfg.fine_tune_include_head);
    TrainConfig tc_c = cfg.train;
    tc_c.adam.lr = cfg.train.adam.lr * cfg.fine_tune_lr_scale;
    tc_c.seed = mix_seed(cfg.train.seed, salt, 0xC0);
    train_adversarial(model_c, train, tgt_train, val, tc_c);
    run.da_ft = evaluate_model(model_c, tgt_test, cfg.p_th, cfg.threads);

    return run;
}

}  // namespace detail

struct Exp2DriverResult {
    std::string driver;
    MetricsReport no_adapt, da, da_ft;
};

struct Exp2Result {
    std::vector<Exp2DriverResult> per_driver;
    MetricsSummary mean_no_adapt, mean_da, mean_da_ft;
    std::vector<std::string> warnings;
};

/// Leave-one-driver-out adaptation: for each held-out driver, (a) a baseline
/// trained without that driver, (b) the adversarial model with the driver as
/// unlabelled target, (c) the same with a fine-tuned extractor; averaged over
/// drivers. Baseline and DA conditions share the identical test samples.
inline Exp2Result run_experiment_2(const std::vector<SequenceObservation>& dataset,
                                   const ExperimentConfig& cfg) {
    const auto splits = lodo_splits(dataset, cfg.target_test_fraction,
                                    mix_seed(cfg.seed, fnv1a64("lodo")));
    Exp2Result out;
    out.warnings = splits.warnings;
    std::vector<MetricsSummary> s_a, s_b, s_c;
    for (const auto& split : splits.splits) {
        const auto run = detail::run_adaptation_conditions(
            detail::take(dataset, split.source), detail::take(dataset, split.target_train),
            detail::take(dataset, split.target_test), cfg, fnv1a64(split.held_out_driver),
            &out.warnings);
        Exp2DriverResult dr;
        dr.driver = split.held_out_driver;
        dr.no_adapt = run.no_adapt;
        dr.da = run.da;
        dr.da_ft = run.da_ft;
        s_a.push_back(summarize(run.no_adapt));
        s_b.push_back(summarize(run.da));
        s_c.push_back(summarize(run.da_ft));
        out.per_driver.push_back(std::move(dr));
    }
    out.mean_no_adapt = mean_of(s_a);
    out.mean_da = mean_of(s_b);
    out.mean_da_ft = mean_of(s_c);
    return out;
}

struct Exp3Result {
    MetricsReport no_adapt, da, da_ft;
    std::vector<std::string> warnings;
};

/// Cross-dataset adaptation: the labelled source dataset trains the model,
/// the unlabelled target-train portion drives the domain branch, and all
/// three conditions are scored on the reserved target test portion.
inline Exp3Result run_experiment_3(const std::vector<SequenceObservation>& source,
                                   const std::vector<SequenceObservation>& target,
                                   const ExperimentConfig& cfg) {
    if (detail::eta_width_of(source) != detail::eta_width_of(target))
        throw SchemaError("source and target datasets have different feature widths");
    for (const auto& s : target)
        if (!s.label.has_value())
            throw SchemaError("experiment 3 needs target labels for evaluation: " + s.id);

    auto [tt_idx, ts_idx] = split_indices(target.size(), cfg.target_test_fraction,
                                          mix_seed(cfg.seed, fnv1a64("tgt-test")));
    Exp3Result out;
    const auto run = detail::run_adaptation_conditions(
        source, detail::take(target, tt_idx), detail::take(target, ts_idx), cfg,
        fnv1a64("exp3"), &out.warnings);
    out.no_adapt = run.no_adapt;
    out.da = run.da;
    out.da_ft = run.da_ft;
    return out;
}

struct LambdaSweepRow {
    double lambda = 0.0;
    double f1 = 0.0;
    double ttp = 0.0;
};

/// F1 versus lambda for the adversarial condition on a source/target pair.
inline std::vector<LambdaSweepRow> run_lambda_sweep(
    const std::vector<SequenceObservation>& source,
    const std::vector<SequenceObservation>& target, const std::vector<double>& lambdas,
    const ExperimentConfig& cfg) {
    std::vector<LambdaSweepRow> rows;
    for (double lambda : lambdas) {
        ExperimentConfig c = cfg;
        c.train.lambda = lambda;

        auto [tt_idx, ts_idx] = split_indices(target.size(), cfg.target_test_fraction,
                                              mix_seed(cfg.seed, fnv1a64("tgt-test")));
        const auto tgt_train_obs = detail::take(target, tt_idx);
        const auto tgt_test_obs = detail::take(target, ts_idx);

        NetworkConfig net = c.net;
        net.eta_dim = detail::eta_width_of(source);
        const NormStats stats = fit_normalization(source);
        auto source_n = apply_normalization(stats, source);
        auto [train_idx, val_idx] = split_indices(source_n.size(), c.val_fraction,
                                                  mix_seed(c.seed, fnv1a64("val")));
        const auto train = prepare_samples<double>(detail::take(source_n, train_idx));
        const auto val = prepare_samples<double>(detail::take(source_n, val_idx));
        const auto tgt_train =
            prepare_samples<double>(apply_normalization(stats, tgt_train_obs));
        const auto tgt_test = prepare_samples<double>(apply_normalization(stats, tgt_test_obs));

        auto model = DaRnnModel<double>::build(net, mix_seed(c.train.seed, fnv1a64("sweep")));
        TrainConfig tc = c.train;
        const auto res = train_adversarial(model, train, tgt_train, val, tc);
        (void)res;
        const auto report = evaluate_model(model, tgt_test, c.p_th, c.threads);
        rows.push_back({lambda, report.f1, report.mean_ttp});
    }
    return rows;
}

}  // namespace darnn

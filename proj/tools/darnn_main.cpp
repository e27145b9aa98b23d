// darnn: manoeuvre-anticipation networks with domain-adversarial adaptation.
//
// Subcommands: featurize, synth, train, adapt, eval, lodo, crossdomain,
// gradcheck. Exit codes: 0 ok, 2 config, 3 schema, 4 numeric, 5 io.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "darnn/cli/run_config.hpp"
#include "darnn/data/augment.hpp"
#include "darnn/data/dataset_io.hpp"
#include "darnn/data/prepare.hpp"
#include "darnn/data/synthetic.hpp"
#include "darnn/eval/experiments.hpp"
#include "darnn/eval/reports.hpp"
#include "darnn/features/import.hpp"
#include "darnn/features/normalize.hpp"
#include "darnn/net/checkpoint.hpp"
#include "darnn/nn/gradcheck.hpp"
#include "darnn/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace darnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSchema = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitIo = 5;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    int threads = -1;                    // -1: not set on the command line
    std::string precision;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
    cmd->add_option("--config", opts->config_path, "typed key-value config file");
    cmd->add_option("--set", opts->overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--threads", opts->threads,
                    "worker threads for evaluation (1 enforces the determinism contract)");
    cmd->add_option("--precision", opts->precision, "numeric precision: f64 (default) or f32");
}

RunConfig build_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) cfg = RunConfig::from_file(opts.config_path);
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (!opts.precision.empty()) cfg.set("run.precision", opts.precision);
    return cfg;
}

void prepare_out_dir(const std::string& out, const RunConfig& cfg) {
    if (out.empty()) throw ConfigError("--out directory is required");
    fs::create_directories(out);
    write_text_file((fs::path(out) / "config.effective").string(), cfg.echo());
}

int effective_threads(const RunConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : default_thread_count();
}

std::vector<SequenceObservation> load_labelled(const std::string& path) {
    auto ds = load_dataset(path);
    for (const auto& s : ds) {
        if (!s.label.has_value())
            throw SchemaError("dataset " + path + " sample " + s.id + " has no label");
    }
    return ds;
}

struct PreparedTraining {
    NormStats stats;
    NetworkConfig net;
    std::vector<SequenceObservation> train_obs, val_obs;
};

/// Shared preamble of train/adapt: joint normalization over the labelled
/// source before the validation split, then optional suffix augmentation of
/// the train portion only.
PreparedTraining prepare_training(const std::vector<SequenceObservation>& source,
                                  const RunConfig& cfg) {
    PreparedTraining p;
    p.stats = fit_normalization(source);
    const auto normed = apply_normalization(p.stats, source);
    auto [train_idx, val_idx] =
        split_indices(normed.size(), cfg.train_val_fraction, mix_seed(cfg.train.seed, fnv1a64("val")));
    for (std::size_t i : train_idx) p.train_obs.push_back(normed[i]);
    for (std::size_t i : val_idx) p.val_obs.push_back(normed[i]);

    if (cfg.exp_augment) {
        bool any_long = false;
        for (const auto& s : p.train_obs) any_long |= s.frames.size() >= 52;
        if (any_long) {
            Rng rng(mix_seed(cfg.train.seed, fnv1a64("augment")));
            auto res = augment_subsequences(p.train_obs,
                                            static_cast<std::size_t>(cfg.exp_augment_target), rng);
            if (res.skipped_short > 0) {
                std::cout << "augmentation: " << res.skipped_short
                          << " sequences too short to subsample\n";
            }
            p.train_obs = std::move(res.samples);
        }
    }

    p.net = cfg.net;
    p.net.eta_dim = source.front().frames.front().eta.size();
    return p;
}

template <class Real>
void write_train_outputs(const std::string& out, const DaRnnModel<Real>& model,
                         const NormStats& stats, const TrainResult& result,
                         const std::vector<PreparedSample<Real>>& val, double p_th,
                         int threads) {
    save_checkpoint((fs::path(out) / "checkpoint.dct").string(),
                    checkpoint_from_model(model, stats));
    write_history_csv((fs::path(out) / "history.csv").string(), result.history);
    const auto report = evaluate_model(model, val, p_th, threads);
    write_text_file((fs::path(out) / "report.txt").string(),
                    format_metrics_text(report, "validation metrics"));
    write_json_file((fs::path(out) / "report.json").string(), metrics_to_json(report));
    std::cout << "best epoch " << result.best_epoch << ", validation score " << result.best_val
              << ", val F1 " << report.f1 << "\n";
    for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
}

template <class Real>
int do_train(const RunConfig& cfg, const std::string& source_path, const std::string& out) {
    prepare_out_dir(out, cfg);
    const auto source = load_labelled(source_path);
    auto p = prepare_training(source, cfg);
    const auto train = prepare_samples<Real>(p.train_obs);
    const auto val = prepare_samples<Real>(p.val_obs);
    auto model = DaRnnModel<Real>::build(p.net, cfg.train.seed);
    const auto result = train_supervised(model, train, val, cfg.train);
    write_train_outputs(out, model, p.stats, result, val, cfg.eval_p_th,
                        effective_threads(cfg));
    return kExitOk;
}

template <class Real>
int do_adapt(const RunConfig& cfg, const std::string& source_path,
             const std::string& target_path, const std::string& donor_path,
             const std::string& out) {
    prepare_out_dir(out, cfg);
    const auto source = load_labelled(source_path);
    const auto target = load_dataset(target_path);
    if (target.empty()) throw SchemaError("target dataset is empty: " + target_path);

    auto p = prepare_training(source, cfg);
    const auto train = prepare_samples<Real>(p.train_obs);
    const auto val = prepare_samples<Real>(p.val_obs);
    const auto tgt = prepare_samples<Real>(apply_normalization(p.stats, target));

    auto model = DaRnnModel<Real>::build(p.net, cfg.train.seed);
    if (!donor_path.empty()) {
        fine_tune_init(model, load_checkpoint(donor_path), /*include_maneuver_head=*/true);
        std::cout << "fine-tuning from " << donor_path << "\n";
    }
    const auto result = train_adversarial(model, train, tgt, val, cfg.train);
    write_train_outputs(out, model, p.stats, result, val, cfg.eval_p_th,
                        effective_threads(cfg));
    return kExitOk;
}

template <class Real>
int do_eval(const RunConfig& cfg, const std::string& data_path, const std::string& ckpt_path,
            const std::string& out, bool dump_trajectories) {
    prepare_out_dir(out, cfg);
    const auto ck = load_checkpoint(ckpt_path);
    const NetworkConfig net = config_from_checkpoint(ck);
    auto model = DaRnnModel<Real>::shaped(net);
    apply_checkpoint(ck, model);

    auto ds = load_labelled(data_path);
    if (ck.stats.has_value()) ds = apply_normalization(*ck.stats, ds);
    const auto samples = prepare_samples<Real>(ds);

    std::vector<AnticipationResult> results(samples.size());
    parallel_for(samples.size(), effective_threads(cfg), [&](std::size_t i) {
        results[i] = anticipate(model, samples[i].x, cfg.eval_p_th);
    });
    std::vector<Maneuver> truth;
    for (const auto& s : samples) truth.push_back(static_cast<Maneuver>(s.label));
    const auto report = compute_metrics(results, truth);

    write_text_file((fs::path(out) / "report.txt").string(),
                    format_metrics_text(report, "evaluation metrics"));
    write_json_file((fs::path(out) / "report.json").string(), metrics_to_json(report));
    if (dump_trajectories) {
        std::ofstream traj((fs::path(out) / "trajectories.jsonl").string(), std::ios::binary);
        for (std::size_t i = 0; i < results.size(); ++i) {
            nlohmann::json j;
            j["id"] = samples[i].id;
            j["true"] = to_string(truth[i]);
            j["predicted"] = to_string(results[i].predicted);
            if (results[i].t_star.has_value()) j["t_star"] = *results[i].t_star;
            j["ttp_seconds"] = results[i].ttp_seconds;
            nlohmann::json rows = nlohmann::json::array();
            for (Index t = 0; t < results[i].trajectory.rows; ++t) {
                nlohmann::json row = nlohmann::json::array();
                for (Index c = 0; c < results[i].trajectory.cols; ++c)
                    row.push_back(results[i].trajectory(t, c));
                rows.push_back(std::move(row));
            }
            j["trajectory"] = std::move(rows);
            traj << j.dump() << "\n";
        }
    }
    std::cout << "F1 " << report.f1 << ", mean TTP " << report.mean_ttp << " s over "
              << samples.size() << " samples\n";
    return kExitOk;
}

int do_synth(const RunConfig& cfg, const std::string& output) {
    if (output.empty()) throw ConfigError("--output file is required");
    const auto ds = generate_synthetic(cfg.synth);
    save_dataset(output, ds);
    std::cout << "wrote " << ds.size() << " observations to " << output << "\n";
    return kExitOk;
}

int do_featurize(const RunConfig& cfg, const std::string& input_dir,
                 const std::string& context, const std::string& output) {
    if (output.empty()) throw ConfigError("--output file is required");
    ImportLog log;
    const auto ds = featurize_directory(input_dir, context, cfg.feat, &log);
    save_dataset(output, ds);
    std::cout << "featurized " << log.samples << " samples ("
              << log.invalid_landmark_frames << " invalid landmark frames, "
              << log.gaze_dropout_frames << " gaze dropout frames) -> " << output << "\n";
    return kExitOk;
}

int do_lodo(const RunConfig& cfg, const std::string& source_path, const std::string& out) {
    prepare_out_dir(out, cfg);
    const auto ds = load_labelled(source_path);
    const auto res = run_experiment_2(ds, cfg.experiment_config());
    write_text_file((fs::path(out) / "report.txt").string(), format_exp2_text(res));
    write_json_file((fs::path(out) / "report.json").string(), exp2_to_json(res));
    std::cout << format_exp2_text(res);
    return kExitOk;
}

int do_crossdomain(const RunConfig& cfg, const std::string& source_path,
                   const std::string& target_path, const std::string& out,
                   const std::string& sweep) {
    prepare_out_dir(out, cfg);
    const auto source = load_labelled(source_path);
    const auto target = load_labelled(target_path);
    const auto res = run_experiment_3(source, target, cfg.experiment_config());
    write_text_file((fs::path(out) / "report.txt").string(), format_exp3_text(res));
    write_json_file((fs::path(out) / "report.json").string(), exp3_to_json(res));
    std::cout << format_exp3_text(res);

    if (!sweep.empty()) {
        std::vector<double> lambdas;
        std::stringstream ss(sweep);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) lambdas.push_back(cfgdetail::parse_double("--lambda-sweep", tok));
        }
        if (lambdas.empty()) throw ConfigError("--lambda-sweep has no values");
        const auto rows = run_lambda_sweep(source, target, lambdas, cfg.experiment_config());
        write_text_file((fs::path(out) / "lambda_sweep.txt").string(),
                        format_lambda_sweep_text(rows));
        std::cout << format_lambda_sweep_text(rows);
    }
    return kExitOk;
}

template <class Real>
int do_gradcheck(const std::string& sizes_arg, std::uint64_t seed) {
    std::vector<Index> sizes;
    std::stringstream ss(sizes_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const long v = cfgdetail::parse_long("--sizes", tok);
        if (v < 1) throw ConfigError("--sizes entries must be >= 1");
        sizes.push_back(static_cast<Index>(v));
    }
    if (sizes.empty()) throw ConfigError("--sizes has no values");

    const auto rep = run_gradcheck<Real>(sizes, seed);
    std::printf("%-24s %-8s %s\n", "suite", "tensor", "max_rel_err");
    for (const auto& row : rep.rows) {
        std::printf("%-24s %-8s %.3e\n", row.suite.c_str(), row.tensor.c_str(),
                    row.max_rel_err);
    }
    const double tol = sizeof(Real) == sizeof(float) ? 1e-2 : 1e-5;
    std::printf("max relative error %.3e (tolerance %.0e): %s\n", rep.max_rel_err, tol,
                rep.passed ? "PASS" : "FAIL");
    return rep.passed ? kExitOk : kExitNumeric;
}

template <class F>
int with_precision(const RunConfig& cfg, F&& f) {
    if (cfg.precision == "f32") return f.template operator()<float>();
    return f.template operator()<double>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"manoeuvre anticipation with domain-adversarial recurrent networks"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string source, target, input_dir, context, output, out_dir, donor, sweep;
    std::string sizes = "2,4,8";
    std::uint64_t seed_flag = 0;
    bool seed_set = false, lambda_set = false, mirror_flag = false, include_speed = false;
    bool dump_traj = false;
    double lambda_flag = 0.0;

    auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(c_synth, &common);
    c_synth->add_option("--output", output, "dataset file to write")->required();
    c_synth->add_option("--seed", seed_flag, "synthetic generator seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* c_feat = app.add_subcommand("featurize", "featurize raw tracker CSV exports");
    add_common(c_feat, &common);
    c_feat->add_option("--input", input_dir, "directory of per-video frame CSVs")->required();
    c_feat->add_option("--context", context, "per-sample context CSV")->required();
    c_feat->add_option("--output", output, "dataset file to write")->required();
    c_feat->add_flag("--mirror-x", mirror_flag, "flip the horizontal sign convention");
    c_feat->add_flag("--include-speed", include_speed, "keep the speed slot (eta width 4)");

    auto* c_train = app.add_subcommand("train", "supervised training on a labelled dataset");
    add_common(c_train, &common);
    c_train->add_option("--source", source, "labelled dataset")->required();
    c_train->add_option("--out", out_dir, "output directory")->required();
    c_train->add_option("--seed", seed_flag, "training seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* c_adapt = app.add_subcommand("adapt", "domain-adversarial training");
    add_common(c_adapt, &common);
    c_adapt->add_option("--source", source, "labelled source dataset")->required();
    c_adapt->add_option("--target", target, "unlabelled target dataset")->required();
    c_adapt->add_option("--out", out_dir, "output directory")->required();
    c_adapt->add_option("--checkpoint", donor, "donor checkpoint for fine-tuning");
    c_adapt->add_option("--seed", seed_flag, "training seed")
        ->each([&](const std::string&) { seed_set = true; });
    c_adapt->add_option("--lambda", lambda_flag, "domain loss multiplier")
        ->each([&](const std::string&) { lambda_set = true; });

    auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on a labelled dataset");
    add_common(c_eval, &common);
    c_eval->add_option("--source", source, "labelled dataset")->required();
    c_eval->add_option("--checkpoint", donor, "checkpoint to evaluate")->required();
    c_eval->add_option("--out", out_dir, "output directory")->required();
    c_eval->add_flag("--dump-trajectories", dump_traj, "write per-sequence trajectories");

    auto* c_lodo = app.add_subcommand("lodo", "leave-one-driver-out adaptation study");
    add_common(c_lodo, &common);
    c_lodo->add_option("--source", source, "labelled multi-driver dataset")->required();
    c_lodo->add_option("--out", out_dir, "output directory")->required();
    c_lodo->add_option("--seed", seed_flag, "training seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* c_cross = app.add_subcommand("crossdomain", "cross-dataset adaptation study");
    add_common(c_cross, &common);
    c_cross->add_option("--source", source, "labelled source dataset")->required();
    c_cross->add_option("--target", target, "target dataset (labels used for evaluation)")
        ->required();
    c_cross->add_option("--out", out_dir, "output directory")->required();
    c_cross->add_option("--lambda", lambda_flag, "domain loss multiplier")
        ->each([&](const std::string&) { lambda_set = true; });
    c_cross->add_option("--lambda-sweep", sweep, "comma-separated lambda values to sweep");
    c_cross->add_option("--seed", seed_flag, "training seed")
        ->each([&](const std::string&) { seed_set = true; });

    auto* c_grad = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    add_common(c_grad, &common);
    c_grad->add_option("--sizes", sizes, "comma-separated hidden/input sizes (default 2,4,8)");
    c_grad->add_option("--seed", seed_flag, "random seed")
        ->each([&](const std::string&) { seed_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = build_config(common);
        if (mirror_flag) cfg.feat.mirror_x = true;
        if (include_speed) cfg.feat.exclude_speed = false;
        if (lambda_set) {
            if (lambda_flag < 0.0) throw ConfigError("--lambda must be >= 0");
            cfg.train.lambda = lambda_flag;
        }
        if (seed_set) {
            cfg.train.seed = seed_flag;
            cfg.synth.seed = seed_flag;
        }

        if (c_synth->parsed()) return do_synth(cfg, output);
        if (c_feat->parsed()) return do_featurize(cfg, input_dir, context, output);
        if (c_train->parsed()) {
            return with_precision(cfg, [&]<class Real>() {
                return do_train<Real>(cfg, source, out_dir);
            });
        }
        if (c_adapt->parsed()) {
            return with_precision(cfg, [&]<class Real>() {
                return do_adapt<Real>(cfg, source, target, donor, out_dir);
            });
        }
        if (c_eval->parsed()) {
            return with_precision(cfg, [&]<class Real>() {
                return do_eval<Real>(cfg, source, donor, out_dir, dump_traj);
            });
        }
        if (c_lodo->parsed()) return do_lodo(cfg, source, out_dir);
        if (c_cross->parsed()) return do_crossdomain(cfg, source, target, out_dir, sweep);
        if (c_grad->parsed()) {
            return with_precision(cfg, [&]<class Real>() {
                return do_gradcheck<Real>(sizes, seed_set ? seed_flag : 2024);
            });
        }
        throw ConfigError("no subcommand selected");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

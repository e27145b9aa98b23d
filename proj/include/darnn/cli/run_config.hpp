#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/data/synthetic.hpp"
#include "darnn/eval/experiments.hpp"
#include "darnn/features/features.hpp"
#include "darnn/net/config.hpp"
#include "darnn/train/trainer.hpp"

namespace darnn {

/// Every knob of every command in one versioned, typed key-value config.
/// Files look like:
///
///     darnn-config 1
///     # comment
///     train.batch_size 128
///     net.gate_activation as_printed
///
/// Unknown keys are rejected; the effective config is echoed into every
/// output directory so a run is reproducible from the echo plus its seed.
struct RunConfig {
    NetworkConfig net;
    TrainConfig train;
    SynthConfig synth;
    FeaturizeOptions feat;
    double eval_p_th = 0.9;
    double train_val_fraction = 0.2;

    // experiment protocol
    double exp_test_fraction = 0.15;
    int exp_folds = 5;
    double exp_target_test_fraction = 0.3;
    bool exp_augment = true;
    long exp_augment_target = 0;
    std::uint64_t exp_seed = 7;

    int threads = 0;  // 0 = DARNN_THREADS env or 1
    std::string precision = "f64";

    void set(const std::string& key, const std::string& value);
    std::string echo() const;
    static RunConfig from_file(const std::string& path);
    ExperimentConfig experiment_config() const;
};

namespace cfgdetail {

struct ConfigKey {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long r = std::stol(v, &used);
        if (used == v.size()) return r;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key " + key + ": expected integer, got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double r = std::stod(v, &used);
        if (used == v.size()) return r;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key " + key + ": expected number, got '" + v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("config key " + key + ": expected boolean, got '" + v + "'");
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const std::map<std::string, ConfigKey>& config_keys() {
    static const std::map<std::string, ConfigKey> keys = [] {
        std::map<std::string, ConfigKey> m;

        auto idx = [&](const std::string& key, std::function<Index&(RunConfig&)> ref) {
            m[key] = ConfigKey{
                [key, ref](RunConfig& c, const std::string& v) {
                    const long x = parse_long(key, v);
                    if (x < 1) throw ConfigError("config key " + key + " must be >= 1");
                    ref(c) = static_cast<Index>(x);
                },
                [ref](const RunConfig& c) {
                    return std::to_string(ref(const_cast<RunConfig&>(c)));
                }};
        };
        auto integer = [&](const std::string& key, std::function<int&(RunConfig&)> ref,
                           long lo) {
            m[key] = ConfigKey{
                [key, ref, lo](RunConfig& c, const std::string& v) {
                    const long x = parse_long(key, v);
                    if (x < lo)
                        throw ConfigError("config key " + key + " must be >= " +
                                          std::to_string(lo));
                    ref(c) = static_cast<int>(x);
                },
                [ref](const RunConfig& c) {
                    return std::to_string(ref(const_cast<RunConfig&>(c)));
                }};
        };
        auto longint = [&](const std::string& key, std::function<long&(RunConfig&)> ref,
                           long lo) {
            m[key] = ConfigKey{
                [key, ref, lo](RunConfig& c, const std::string& v) {
                    const long x = parse_long(key, v);
                    if (x < lo)
                        throw ConfigError("config key " + key + " must be >= " +
                                          std::to_string(lo));
                    ref(c) = x;
                },
                [ref](const RunConfig& c) {
                    return std::to_string(ref(const_cast<RunConfig&>(c)));
                }};
        };
        auto u64 = [&](const std::string& key, std::function<std::uint64_t&(RunConfig&)> ref) {
            m[key] = ConfigKey{
                [key, ref](RunConfig& c, const std::string& v) {
                    try {
                        std::size_t used = 0;
                        const unsigned long long x = std::stoull(v, &used);
                        if (used == v.size()) {
                            ref(c) = static_cast<std::uint64_t>(x);
                            return;
                        }
                    } catch (const std::exception&) {
                    }
                    throw ConfigError("config key " + key + ": expected unsigned integer");
                },
                [ref](const RunConfig& c) {
                    return std::to_string(ref(const_cast<RunConfig&>(c)));
                }};
        };
        auto num = [&](const std::string& key, std::function<double&(RunConfig&)> ref) {
            m[key] = ConfigKey{
                [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_double(key, v); },
                [ref](const RunConfig& c) {
                    return format_double(ref(const_cast<RunConfig&>(c)));
                }};
        };
        auto boolean = [&](const std::string& key, std::function<bool&(RunConfig&)> ref) {
            m[key] = ConfigKey{
                [key, ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); },
                [ref](const RunConfig& c) {
                    return ref(const_cast<RunConfig&>(c)) ? "true" : "false";
                }};
        };
        auto text = [&](const std::string& key, std::function<std::string&(RunConfig&)> ref,
                        std::vector<std::string> allowed = {}) {
            m[key] = ConfigKey{
                [key, ref, allowed](RunConfig& c, const std::string& v) {
                    if (!allowed.empty()) {
                        bool ok = false;
                        for (const auto& a : allowed) ok |= a == v;
                        if (!ok)
                            throw ConfigError("config key " + key + ": unsupported value '" + v +
                                              "'");
                    }
                    ref(c) = v;
                },
                [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
        };

        // network
        idx("net.hidden_phi", [](RunConfig& c) -> Index& { return c.net.hidden_phi; });
        idx("net.hidden_gamma", [](RunConfig& c) -> Index& { return c.net.hidden_gamma; });
        idx("net.hidden_fusion_gru",
            [](RunConfig& c) -> Index& { return c.net.hidden_fusion_gru; });
        idx("net.hidden_eta", [](RunConfig& c) -> Index& { return c.net.hidden_eta; });
        idx("net.fusion_width", [](RunConfig& c) -> Index& { return c.net.fusion_width; });
        idx("net.num_classes", [](RunConfig& c) -> Index& { return c.net.num_classes; });
        idx("net.domain_hidden", [](RunConfig& c) -> Index& { return c.net.domain_hidden; });
        num("net.dropout_recurrent",
            [](RunConfig& c) -> double& { return c.net.dropout_recurrent; });
        num("net.dropout_output", [](RunConfig& c) -> double& { return c.net.dropout_output; });
        boolean("net.domain_per_timestep",
                [](RunConfig& c) -> bool& { return c.net.domain_per_timestep; });
        m["net.gate_activation"] = ConfigKey{
            [](RunConfig& c, const std::string& v) {
                c.net.gate_activation = gate_activation_from_string(v);
            },
            [](const RunConfig& c) { return to_string(c.net.gate_activation); }};
        m["net.peephole_mode"] = ConfigKey{
            [](RunConfig& c, const std::string& v) {
                c.net.peephole_mode = peephole_mode_from_string(v);
            },
            [](const RunConfig& c) { return to_string(c.net.peephole_mode); }};
        m["net.gru_reading"] = ConfigKey{
            [](RunConfig& c, const std::string& v) { c.net.gru_reading = gru_reading_from_string(v); },
            [](const RunConfig& c) { return to_string(c.net.gru_reading); }};

        // training
        integer("train.batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; }, 1);
        integer("train.max_epochs", [](RunConfig& c) -> int& { return c.train.max_epochs; }, 1);
        integer("train.patience", [](RunConfig& c) -> int& { return c.train.patience; }, 1);
        integer("train.lambda_warmup_epochs",
                [](RunConfig& c) -> int& { return c.train.lambda_warmup_epochs; }, 0);
        u64("train.seed", [](RunConfig& c) -> std::uint64_t& { return c.train.seed; });
        num("train.lambda", [](RunConfig& c) -> double& { return c.train.lambda; });
        num("train.lr", [](RunConfig& c) -> double& { return c.train.adam.lr; });
        num("train.beta1", [](RunConfig& c) -> double& { return c.train.adam.beta1; });
        num("train.beta2", [](RunConfig& c) -> double& { return c.train.adam.beta2; });
        num("train.epsilon", [](RunConfig& c) -> double& { return c.train.adam.eps; });
        num("train.decay_rate", [](RunConfig& c) -> double& { return c.train.decay_rate; });
        num("train.grad_clip_norm",
            [](RunConfig& c) -> double& { return c.train.grad_clip_norm; });
        num("train.val_fraction", [](RunConfig& c) -> double& { return c.train_val_fraction; });
        m["train.early_stop_metric"] = ConfigKey{
            [](RunConfig& c, const std::string& v) {
                if (v == "loss")
                    c.train.early_stop_metric = EarlyStopMetric::Loss;
                else if (v == "f1")
                    c.train.early_stop_metric = EarlyStopMetric::F1;
                else
                    throw ConfigError("train.early_stop_metric must be loss or f1");
            },
            [](const RunConfig& c) {
                return c.train.early_stop_metric == EarlyStopMetric::Loss ? "loss" : "f1";
            }};

        // evaluation / experiment protocol
        num("eval.p_th", [](RunConfig& c) -> double& { return c.eval_p_th; });
        num("exp.test_fraction", [](RunConfig& c) -> double& { return c.exp_test_fraction; });
        integer("exp.folds", [](RunConfig& c) -> int& { return c.exp_folds; }, 2);
        num("exp.target_test_fraction",
            [](RunConfig& c) -> double& { return c.exp_target_test_fraction; });
        boolean("exp.augment", [](RunConfig& c) -> bool& { return c.exp_augment; });
        longint("exp.augment_target", [](RunConfig& c) -> long& { return c.exp_augment_target; },
                0);
        u64("exp.seed", [](RunConfig& c) -> std::uint64_t& { return c.exp_seed; });

        // featurization
        boolean("feat.mirror_x", [](RunConfig& c) -> bool& { return c.feat.mirror_x; });
        boolean("feat.exclude_speed",
                [](RunConfig& c) -> bool& { return c.feat.exclude_speed; });

        // synthetic generator
        static const char* class_keys[5] = {"synth.count_straight", "synth.count_lane_left",
                                            "synth.count_lane_right", "synth.count_turn_left",
                                            "synth.count_turn_right"};
        for (int cls = 0; cls < 5; ++cls) {
            const std::string key = class_keys[cls];
            m[key] = ConfigKey{
                [key, cls](RunConfig& c, const std::string& v) {
                    const long x = parse_long(key, v);
                    if (x < 0) throw ConfigError("config key " + key + " must be >= 0");
                    c.synth.per_class_counts[cls] = static_cast<int>(x);
                },
                [cls](const RunConfig& c) {
                    return std::to_string(c.synth.per_class_counts[cls]);
                }};
        }
        integer("synth.sequence_length",
                [](RunConfig& c) -> int& { return c.synth.sequence_length; }, 8);
        num("synth.head_amplitude",
            [](RunConfig& c) -> double& { return c.synth.head_amplitude; });
        integer("synth.gaze_lead", [](RunConfig& c) -> int& { return c.synth.gaze_lead; }, 1);
        num("synth.noise", [](RunConfig& c) -> double& { return c.synth.noise; });
        integer("synth.num_drivers", [](RunConfig& c) -> int& { return c.synth.num_drivers; },
                1);
        num("synth.per_driver_shift",
            [](RunConfig& c) -> double& { return c.synth.per_driver_shift; });
        boolean("synth.include_speed",
                [](RunConfig& c) -> bool& { return c.synth.include_speed; });
        u64("synth.seed", [](RunConfig& c) -> std::uint64_t& { return c.synth.seed; });
        text("synth.id_prefix", [](RunConfig& c) -> std::string& { return c.synth.id_prefix; });
        m["synth.domain"] = ConfigKey{
            [](RunConfig& c, const std::string& v) { c.synth.domain = domain_from_string(v); },
            [](const RunConfig& c) { return to_string(c.synth.domain); }};
        num("synth.shift.amplitude_scale",
            [](RunConfig& c) -> double& { return c.synth.shift.amplitude_scale; });
        num("synth.shift.gaze_scale",
            [](RunConfig& c) -> double& { return c.synth.shift.gaze_scale; });
        integer("synth.shift.lead_offset",
                [](RunConfig& c) -> int& { return c.synth.shift.lead_offset; }, -1000);
        num("synth.shift.bin_shift",
            [](RunConfig& c) -> double& { return c.synth.shift.bin_shift; });
        boolean("synth.shift.mirror",
                [](RunConfig& c) -> bool& { return c.synth.shift.mirror; });

        // run environment
        integer("run.threads", [](RunConfig& c) -> int& { return c.threads; }, 0);
        text("run.precision", [](RunConfig& c) -> std::string& { return c.precision; },
             {"f64", "f32"});
        return m;
    }();
    return keys;
}

}  // namespace cfgdetail

inline void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = cfgdetail::config_keys();
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown config key: " + key);
    it->second.set(*this, value);
}

inline std::string RunConfig::echo() const {
    std::string out = "darnn-config 1\n";
    for (const auto& [key, handler] : cfgdetail::config_keys()) {
        out += key + " " + handler.get(*this) + "\n";
    }
    return out;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    bool saw_version = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_version) {
            if (line != "darnn-config 1") {
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected version header 'darnn-config 1'");
            }
            saw_version = true;
            continue;
        }
        const auto space = line.find(' ');
        if (space == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected '<key> <value>'");
        }
        cfg.set(line.substr(0, space), line.substr(space + 1));
    }
    if (!saw_version) throw ConfigError(path + ": missing version header");
    return cfg;
}

inline ExperimentConfig RunConfig::experiment_config() const {
    ExperimentConfig e;
    e.net = net;
    e.train = train;
    e.test_fraction = exp_test_fraction;
    e.folds = exp_folds;
    e.val_fraction = train_val_fraction;
    e.target_test_fraction = exp_target_test_fraction;
    e.augment = exp_augment;
    e.augment_target_per_class = static_cast<std::size_t>(exp_augment_target);
    e.p_th = eval_p_th;
    e.seed = exp_seed;
    e.threads = threads > 0 ? threads : default_thread_count();
    return e;
}

}  // namespace darnn

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "darnn/core/error.hpp"
#include "darnn/core/mat.hpp"
#include "darnn/features/normalize.hpp"
#include "darnn/net/model.hpp"

namespace darnn {

/// Self-describing text checkpoint: a manifest of config switches, optional
/// normalization statistics, and every tensor as shape + row-major float64
/// values. %.17g round-trips doubles exactly, so save/load/save is
/// byte-stable.
struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::map<std::string, Mat<double>> tensors;
    std::optional<NormStats> stats;
};

namespace detail {

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

template <class Real>
inline Checkpoint checkpoint_from_model(const DaRnnModel<Real>& model,
                                        const std::optional<NormStats>& stats = std::nullopt) {
    Checkpoint ck;
    const NetworkConfig& c = model.cfg;
    ck.meta["phi_dim"] = std::to_string(c.phi_dim);
    ck.meta["gamma_dim"] = std::to_string(c.gamma_dim);
    ck.meta["eta_dim"] = std::to_string(c.eta_dim);
    ck.meta["hidden_phi"] = std::to_string(c.hidden_phi);
    ck.meta["hidden_gamma"] = std::to_string(c.hidden_gamma);
    ck.meta["hidden_fusion_gru"] = std::to_string(c.hidden_fusion_gru);
    ck.meta["hidden_eta"] = std::to_string(c.hidden_eta);
    ck.meta["fusion_width"] = std::to_string(c.fusion_width);
    ck.meta["num_classes"] = std::to_string(c.num_classes);
    ck.meta["domain_hidden"] = std::to_string(c.domain_hidden);
    ck.meta["gate_activation"] = to_string(c.gate_activation);
    ck.meta["peephole_mode"] = to_string(c.peephole_mode);
    ck.meta["gru_reading"] = to_string(c.gru_reading);
    ck.meta["domain_per_timestep"] = c.domain_per_timestep ? "1" : "0";
    ck.meta["norm_stats_id"] = stats.has_value() ? stats->id() : "none";
    model.for_each_param([&](const std::string& name, const Mat<Real>& m) {
        Mat<double> d(m.rows, m.cols);
        for (Index i = 0; i < m.size(); ++i) d.a[i] = static_cast<double>(m.a[i]);
        ck.tensors[name] = std::move(d);
    });
    ck.stats = stats;
    return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out << "darnn-checkpoint 1\n";
    for (const auto& [k, v] : ck.meta) out << "meta " << k << " " << v << "\n";
    if (ck.stats.has_value()) {
        const NormStats& s = *ck.stats;
        out << "normstats " << s.mean.size() << "\n";
        for (std::size_t i = 0; i < s.mean.size(); ++i) {
            out << detail::format_g17(s.mean[i]) << " " << detail::format_g17(s.stddev[i]) << " "
                << static_cast<int>(s.passthrough[i]) << "\n";
        }
    }
    for (const auto& [name, m] : ck.tensors) {
        out << "tensor " << name << " " << m.rows << " " << m.cols << "\n";
        for (Index i = 0; i < m.rows; ++i) {
            for (Index j = 0; j < m.cols; ++j) {
                if (j != 0) out << " ";
                out << detail::format_g17(m(i, j));
            }
            out << "\n";
        }
    }
    out << "end\n";
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "darnn-checkpoint 1") {
        throw SchemaError("not a darnn checkpoint (bad header): " + path);
    }
    Checkpoint ck;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") {
            saw_end = true;
            break;
        }
        if (tag == "meta") {
            std::string k, v;
            ls >> k >> v;
            ck.meta[k] = v;
        } else if (tag == "normstats") {
            std::size_t n = 0;
            ls >> n;
            NormStats s;
            s.mean.resize(n);
            s.stddev.resize(n);
            s.passthrough.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                int pt = 0;
                if (!(in >> s.mean[i] >> s.stddev[i] >> pt)) {
                    throw SchemaError("truncated normstats block in " + path);
                }
                s.passthrough[i] = static_cast<std::uint8_t>(pt);
            }
            std::getline(in, line);  // consume rest of last stats line
            ck.stats = std::move(s);
        } else if (tag == "tensor") {
            std::string name;
            Index rows = 0, cols = 0;
            ls >> name >> rows >> cols;
            Mat<double> m(rows, cols);
            for (Index i = 0; i < m.size(); ++i) {
                if (!(in >> m.a[i])) {
                    throw SchemaError("truncated tensor " + name + " in " + path);
                }
            }
            std::getline(in, line);
            ck.tensors[name] = std::move(m);
        } else {
            throw SchemaError("unknown checkpoint record '" + tag + "' in " + path);
        }
    }
    if (!saw_end) throw SchemaError("checkpoint missing end marker: " + path);
    return ck;
}

/// Rebuilds the network configuration stored in a checkpoint manifest.
inline NetworkConfig config_from_checkpoint(const Checkpoint& ck) {
    NetworkConfig cfg;
    auto get = [&](const char* key) -> std::string {
        const auto it = ck.meta.find(key);
        if (it == ck.meta.end())
            throw SchemaError(std::string("checkpoint manifest is missing '") + key + "'");
        return it->second;
    };
    auto get_index = [&](const char* key) {
        return static_cast<Index>(std::stoul(get(key)));
    };
    cfg.phi_dim = get_index("phi_dim");
    cfg.gamma_dim = get_index("gamma_dim");
    cfg.eta_dim = get_index("eta_dim");
    cfg.hidden_phi = get_index("hidden_phi");
    cfg.hidden_gamma = get_index("hidden_gamma");
    cfg.hidden_fusion_gru = get_index("hidden_fusion_gru");
    cfg.hidden_eta = get_index("hidden_eta");
    cfg.fusion_width = get_index("fusion_width");
    cfg.num_classes = get_index("num_classes");
    cfg.domain_hidden = get_index("domain_hidden");
    cfg.gate_activation = gate_activation_from_string(get("gate_activation"));
    cfg.peephole_mode = peephole_mode_from_string(get("peephole_mode"));
    cfg.gru_reading = gru_reading_from_string(get("gru_reading"));
    cfg.domain_per_timestep = get("domain_per_timestep") == "1";
    return cfg;
}

/// Copies every tensor of the checkpoint into the model, rejecting shape or
/// switch mismatches with the offending layer named.
template <class Real>
inline void apply_checkpoint(const Checkpoint& ck, DaRnnModel<Real>& model) {
    model.for_each_param([&](const std::string& name, Mat<Real>& m) {
        auto it = ck.tensors.find(name);
        if (it == ck.tensors.end())
            throw SchemaError("checkpoint is missing tensor " + name);
        if (it->second.rows != m.rows || it->second.cols != m.cols) {
            throw ShapeError("checkpoint tensor " + name + " has shape " +
                             std::to_string(it->second.rows) + "x" +
                             std::to_string(it->second.cols) + ", model expects " +
                             std::to_string(m.rows) + "x" + std::to_string(m.cols));
        }
        for (Index i = 0; i < m.size(); ++i) m.a[i] = static_cast<Real>(it->second.a[i]);
    });
}

/// Fine-tuning init: overwrites the feature-extractor layers (and optionally
/// the manoeuvre head) from a donor checkpoint. The domain head keeps its
/// fresh initialization. Optimizer state is the caller's to reset.
template <class Real>
inline void fine_tune_init(DaRnnModel<Real>& model, const Checkpoint& ck,
                           bool include_maneuver_head = false) {
    auto transferable = [&](const std::string& name) {
        for (const auto& layer : DaRnnModel<Real>::transferable_layers()) {
            if (name.rfind(layer + ".", 0) == 0) {
                return layer != "maneuver_head" || include_maneuver_head;
            }
        }
        return false;
    };
    model.for_each_param([&](const std::string& name, Mat<Real>& m) {
        if (!transferable(name)) return;
        auto it = ck.tensors.find(name);
        if (it == ck.tensors.end())
            throw SchemaError("donor checkpoint is missing tensor " + name);
        if (it->second.rows != m.rows || it->second.cols != m.cols) {
            throw ShapeError("donor tensor " + name + " has shape " +
                             std::to_string(it->second.rows) + "x" +
                             std::to_string(it->second.cols) + ", model expects " +
                             std::to_string(m.rows) + "x" + std::to_string(m.cols));
        }
        for (Index i = 0; i < m.size(); ++i) m.a[i] = static_cast<Real>(it->second.a[i]);
    });
}

}  // namespace darnn

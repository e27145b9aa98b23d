#pragma once

#include <string>

#include "darnn/core/error.hpp"
#include "darnn/core/mat.hpp"
#include "darnn/nn/gru.hpp"
#include "darnn/nn/lstm.hpp"

namespace darnn {

/// Sizes and switches of the fusion network. Input widths follow the feature
/// pipeline: head features 13, gaze 8, environment 3 (4 with speed included).
struct NetworkConfig {
    Index phi_dim = 13;
    Index gamma_dim = 8;
    Index eta_dim = 3;

    Index hidden_phi = 128;
    Index hidden_gamma = 64;
    Index hidden_fusion_gru = 128;
    Index hidden_eta = 32;
    Index fusion_width = 128;   // width of z_t
    Index num_classes = 5;
    Index domain_hidden = 32;

    double dropout_recurrent = 0.6;
    double dropout_output = 0.7;

    GateActivation gate_activation = GateActivation::AsPrinted;
    PeepholeMode peephole_mode = PeepholeMode::FullMatrix;
    GruReading gru_reading = GruReading::Standard;

    /// When set the domain head scores every timestep's fusion vector and the
    /// domain loss averages over time; default scores only z_T.
    bool domain_per_timestep = false;

    void validate() const {
        auto positive = [](Index v, const char* name) {
            if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
        };
        positive(phi_dim, "phi_dim");
        positive(gamma_dim, "gamma_dim");
        positive(eta_dim, "eta_dim");
        positive(hidden_phi, "hidden_phi");
        positive(hidden_gamma, "hidden_gamma");
        positive(hidden_fusion_gru, "hidden_fusion_gru");
        positive(hidden_eta, "hidden_eta");
        positive(fusion_width, "fusion_width");
        positive(num_classes, "num_classes");
        positive(domain_hidden, "domain_hidden");
        if (dropout_recurrent < 0.0 || dropout_recurrent >= 1.0 || dropout_output < 0.0 ||
            dropout_output >= 1.0) {
            throw ConfigError("dropout rates must be in [0,1)");
        }
    }
};

inline std::string to_string(GateActivation g) {
    return g == GateActivation::AsPrinted ? "as_printed" : "conventional";
}

inline std::string to_string(PeepholeMode p) {
    return p == PeepholeMode::FullMatrix ? "full_matrix" : "diagonal";
}

inline std::string to_string(GruReading r) {
    return r == GruReading::Standard ? "standard" : "swapped";
}

inline GateActivation gate_activation_from_string(const std::string& s) {
    if (s == "as_printed") return GateActivation::AsPrinted;
    if (s == "conventional") return GateActivation::Conventional;
    throw ConfigError("unknown gate_activation: " + s);
}

inline PeepholeMode peephole_mode_from_string(const std::string& s) {
    if (s == "full_matrix") return PeepholeMode::FullMatrix;
    if (s == "diagonal") return PeepholeMode::Diagonal;
    throw ConfigError("unknown peephole_mode: " + s);
}

inline GruReading gru_reading_from_string(const std::string& s) {
    if (s == "standard") return GruReading::Standard;
    if (s == "swapped") return GruReading::Swapped;
    throw ConfigError("unknown gru_reading: " + s);
}

}  // namespace darnn

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"

namespace darnn {

inline constexpr std::size_t kPhiDim = 13;
inline constexpr std::size_t kGammaDim = 8;
inline constexpr double kFrameRate = 30.0;
inline constexpr std::size_t kNumClasses = 5;

enum class Maneuver : int {
    Straight = 0,
    LaneLeft = 1,
    LaneRight = 2,
    TurnLeft = 3,
    TurnRight = 4,
};

inline const char* to_string(Maneuver m) {
    switch (m) {
        case Maneuver::Straight: return "straight";
        case Maneuver::LaneLeft: return "lane_left";
        case Maneuver::LaneRight: return "lane_right";
        case Maneuver::TurnLeft: return "turn_left";
        case Maneuver::TurnRight: return "turn_right";
    }
    return "straight";
}

inline Maneuver maneuver_from_string(const std::string& s) {
    if (s == "straight") return Maneuver::Straight;
    if (s == "lane_left") return Maneuver::LaneLeft;
    if (s == "lane_right") return Maneuver::LaneRight;
    if (s == "turn_left") return Maneuver::TurnLeft;
    if (s == "turn_right") return Maneuver::TurnRight;
    throw SchemaError("unknown manoeuvre label: " + s);
}

enum class Domain : int { Source = 0, Target = 1 };

inline const char* to_string(Domain d) { return d == Domain::Source ? "source" : "target"; }

inline Domain domain_from_string(const std::string& s) {
    if (s == "source") return Domain::Source;
    if (s == "target") return Domain::Target;
    throw SchemaError("unknown domain tag: " + s);
}

/// Per-frame feature vectors: phi (6 horizontal-motion bins, 4 angular bins,
/// 3 Euler angles), gamma (one-hot x and y gaze bins), eta (lane-left,
/// lane-right, intersection flags and, unless excluded, speed in km/h).
struct FrameFeatures {
    std::array<double, kPhiDim> phi{};
    std::array<double, kGammaDim> gamma{};
    std::vector<double> eta;  // width 3 (speed excluded, default) or 4
};

/// One 5-second sample at 30 frames/s. Labels are required on source-domain
/// observations; target observations may carry them for evaluation only.
struct SequenceObservation {
    std::string id;
    std::string driver_id;
    Domain domain = Domain::Source;
    std::optional<Maneuver> label;
    std::vector<FrameFeatures> frames;
};

}  // namespace darnn

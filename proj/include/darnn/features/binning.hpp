#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace darnn {

/// Horizontal-motion bins (pixels):
/// {dx<=-5; -5<dx<=-2.5; -2.5<dx<=0; 0<dx<=2.5; 2.5<dx<=5; dx>5}.
/// Total on the reals: the outermost bins absorb the tails.
inline std::size_t horizontal_motion_bin(double dx) {
    if (dx <= -5.0) return 0;
    if (dx <= -2.5) return 1;
    if (dx <= 0.0) return 2;
    if (dx <= 2.5) return 3;
    if (dx <= 5.0) return 4;
    return 5;
}

/// Angular-motion bins over (0, 2pi]:
/// {0<th<=pi/2; pi/2<th<=pi; pi<th<=3pi/2; 3pi/2<th<=2pi}.
/// arctan2 results in (-pi, pi] are shifted by +2pi when <= 0, so theta = 0
/// lands in the fourth bin by the 0 == 2pi convention.
inline std::size_t angular_motion_bin(double theta_atan2) {
    constexpr double kPi = 3.14159265358979323846;
    double th = theta_atan2;
    if (th <= 0.0) th += 2.0 * kPi;
    if (th <= 0.5 * kPi) return 0;
    if (th <= kPi) return 1;
    if (th <= 1.5 * kPi) return 2;
    return 3;
}

/// Gaze-component bins over [-1, 1]:
/// {v<=-0.5; -0.5<v<=0; 0<v<=0.5; v>0.5}; outer bins absorb the tails.
inline std::size_t gaze_bin(double v) {
    if (v <= -0.5) return 0;
    if (v <= 0.0) return 1;
    if (v <= 0.5) return 2;
    return 3;
}

inline std::array<double, 8> gaze_onehot(double x, double y) {
    std::array<double, 8> g{};
    g[gaze_bin(x)] = 1.0;
    g[4 + gaze_bin(y)] = 1.0;
    return g;
}

}  // namespace darnn

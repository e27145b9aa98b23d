#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"
#include "darnn/data/observation.hpp"
#include "darnn/features/binning.hpp"
#include "darnn/features/butterworth.hpp"

namespace darnn {

inline constexpr std::size_t kNumLandmarks = 68;

/// One tracker export row: 68 facial-landmark pixel positions, head pose
/// Euler angles (radians), and per-eye normalized gaze direction vectors in
/// world coordinates.
struct RawFrame {
    std::array<double, kNumLandmarks> x{};
    std::array<double, kNumLandmarks> y{};
    double pitch = 0.0, yaw = 0.0, roll = 0.0;
    std::array<double, 3> gaze_left{};
    std::array<double, 3> gaze_right{};
    bool landmarks_valid = true;
    bool gaze_valid = true;
};

struct EnvRecord {
    double lane_left = 0.0;
    double lane_right = 0.0;
    double intersection = 0.0;
    double speed = 0.0;
};

struct FeaturizeOptions {
    bool mirror_x = false;       // flips the horizontal sign convention (camera mirroring)
    bool exclude_speed = true;   // default on: eta has width 3
    int butterworth_order = 4;
    double sample_rate_hz = 30.0;
    double cutoff_hz = 1.66;
};

struct MotionHistograms {
    std::array<double, 6> horizontal{};
    std::array<double, 4> angular{};
};

/// Landmark-velocity histograms between consecutive frames: per landmark,
/// dx in pixels and theta = arctan2(dy, dx) mapped to (0, 2pi], binned and
/// normalized by the landmark count so each group sums to 1.
inline MotionHistograms landmark_motion_histograms(const RawFrame& prev, const RawFrame& curr,
                                                   bool mirror_x = false) {
    MotionHistograms h;
    for (std::size_t l = 0; l < kNumLandmarks; ++l) {
        double dx = curr.x[l] - prev.x[l];
        if (mirror_x) dx = -dx;
        const double dy = curr.y[l] - prev.y[l];
        h.horizontal[horizontal_motion_bin(dx)] += 1.0;
        h.angular[angular_motion_bin(std::atan2(dy, dx))] += 1.0;
    }
    for (auto& v : h.horizontal) v /= static_cast<double>(kNumLandmarks);
    for (auto& v : h.angular) v /= static_cast<double>(kNumLandmarks);
    return h;
}

/// phi = [6 horizontal bins | 4 angular bins | pitch, yaw, roll]. The Euler
/// angles pass through unchanged.
inline std::array<double, kPhiDim> head_features(const RawFrame& prev, const RawFrame& curr,
                                                 bool mirror_x = false) {
    const auto h = landmark_motion_histograms(prev, curr, mirror_x);
    std::array<double, kPhiDim> phi{};
    for (std::size_t b = 0; b < 6; ++b) phi[b] = h.horizontal[b];
    for (std::size_t b = 0; b < 4; ++b) phi[6 + b] = h.angular[b];
    phi[10] = curr.pitch;
    phi[11] = curr.yaw;
    phi[12] = curr.roll;
    return phi;
}

/// Gaze features over a sequence: average of the two eye direction vectors,
/// x/y components low-pass filtered (causal Butterworth, primed at the first
/// valid sample), scaled to [-1,1] by the joint running max-abs, then binned
/// one-hot per axis. The running (rather than whole-sequence) max keeps the
/// featurizer streaming-capable: frame t depends only on frames <= t.
/// Eye-tracking dropouts hold the last filtered value.
inline std::vector<std::array<double, kGammaDim>> gaze_features(
    const std::vector<RawFrame>& frames, const FeaturizeOptions& opt = {},
    std::size_t* dropout_frames = nullptr) {
    ButterworthLowPass fx(opt.butterworth_order, opt.sample_rate_hz, opt.cutoff_hz);
    ButterworthLowPass fy(opt.butterworth_order, opt.sample_rate_hz, opt.cutoff_hz);
    std::vector<double> gx(frames.size(), 0.0), gy(frames.size(), 0.0);
    bool primed = false;
    double last_x = 0.0, last_y = 0.0;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const RawFrame& f = frames[t];
        if (f.gaze_valid) {
            double ax = 0.5 * (f.gaze_left[0] + f.gaze_right[0]);
            const double ay = 0.5 * (f.gaze_left[1] + f.gaze_right[1]);
            if (opt.mirror_x) ax = -ax;
            if (!primed) {
                fx.prime(ax);
                fy.prime(ay);
                primed = true;
            }
            last_x = fx.process(ax);
            last_y = fy.process(ay);
        } else if (dropout_frames != nullptr) {
            ++*dropout_frames;
        }
        gx[t] = last_x;
        gy[t] = last_y;
    }

    std::vector<std::array<double, kGammaDim>> out(frames.size());
    double max_abs = 0.0;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        max_abs = std::max({max_abs, std::abs(gx[t]), std::abs(gy[t])});
        const double scale = max_abs > 0.0 ? 1.0 / max_abs : 1.0;
        out[t] = gaze_onehot(gx[t] * scale, gy[t] * scale);
    }
    return out;
}

/// eta = [lane_left, lane_right, intersection(, speed km/h)]. The speed slot
/// is dropped by default.
inline std::vector<double> environment_features(const EnvRecord& rec, bool exclude_speed = true) {
    auto flag = [](double v, const char* name) {
        if (v != 0.0 && v != 1.0)
            throw SchemaError(std::string("environment flag ") + name +
                              " must be 0 or 1, got " + std::to_string(v));
        return v;
    };
    std::vector<double> eta = {flag(rec.lane_left, "lane_left"),
                               flag(rec.lane_right, "lane_right"),
                               flag(rec.intersection, "intersection")};
    if (!exclude_speed) eta.push_back(rec.speed);
    return eta;
}

struct FeaturizeStats {
    std::size_t invalid_landmark_frames = 0;
    std::size_t gaze_dropout_frames = 0;
};

/// Full per-sequence featurization. Frames with missing landmarks are marked
/// invalid and carry the last valid frame's head features forward; the first
/// frame has no predecessor, so its motion histograms are all-zero.
inline std::vector<FrameFeatures> featurize_sequence(const std::vector<RawFrame>& frames,
                                                     const EnvRecord& env,
                                                     const FeaturizeOptions& opt = {},
                                                     FeaturizeStats* stats = nullptr) {
    if (frames.empty()) throw SchemaError("featurize_sequence: empty frame list");
    if (frames.size() > 150)
        throw SchemaError("featurize_sequence: more than 150 frames in one sample");

    const auto gamma = gaze_features(frames, opt,
                                     stats != nullptr ? &stats->gaze_dropout_frames : nullptr);
    const auto eta = environment_features(env, opt.exclude_speed);

    std::vector<FrameFeatures> out(frames.size());
    std::array<double, kPhiDim> last_phi{};
    const RawFrame* prev_valid = nullptr;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const RawFrame& f = frames[t];
        if (!f.landmarks_valid) {
            if (stats != nullptr) ++stats->invalid_landmark_frames;
            out[t].phi = last_phi;  // carry forward
        } else {
            if (prev_valid == nullptr) {
                // no predecessor: motion histograms stay all-zero
                std::array<double, kPhiDim> phi{};
                phi[10] = f.pitch;
                phi[11] = f.yaw;
                phi[12] = f.roll;
                out[t].phi = phi;
            } else {
                out[t].phi = head_features(*prev_valid, f, opt.mirror_x);
            }
            prev_valid = &f;
            last_phi = out[t].phi;
        }
        out[t].gamma = gamma[t];
        out[t].eta = eta;
    }
    return out;
}

}  // namespace darnn

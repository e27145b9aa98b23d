#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "darnn/data/observation.hpp"
#include "darnn/features/features.hpp"
#include "darnn/io/csv.hpp"

namespace darnn {

/// One row of the per-sample context file: which raw CSV the sample lives in
/// plus its annotations (lane flags, intersection flag, speed, label, ids).
struct ContextRecord {
    std::string video;  // CSV filename inside the input directory
    std::string id;
    std::string driver_id;
    Domain domain = Domain::Source;
    std::optional<Maneuver> label;
    EnvRecord env;
};

inline std::vector<ContextRecord> read_context_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_video = t.column("video", path);
    const std::size_t c_id = t.column("id", path);
    const std::size_t c_driver = t.column("driver_id", path);
    const std::size_t c_domain = t.column("domain", path);
    const std::size_t c_label = t.column("label", path);
    const std::size_t c_ll = t.column("lane_left", path);
    const std::size_t c_lr = t.column("lane_right", path);
    const std::size_t c_int = t.column("intersection", path);
    const std::size_t c_speed = t.column("speed", path);

    std::vector<ContextRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        ContextRecord rec;
        rec.video = row[c_video];
        rec.id = row[c_id];
        rec.driver_id = row[c_driver];
        rec.domain = domain_from_string(row[c_domain]);
        if (!row[c_label].empty()) rec.label = maneuver_from_string(row[c_label]);
        if (rec.domain == Domain::Source && !rec.label.has_value()) {
            throw SchemaError("context " + path + " row " + std::to_string(r + 2) +
                              ": source-domain sample without a label");
        }
        auto num = [&](std::size_t col, const char* name) {
            double v = 0.0;
            if (!parse_cell(row[col], &v)) {
                throw SchemaError("context " + path + " row " + std::to_string(r + 2) +
                                  ": bad value for " + name);
            }
            return v;
        };
        rec.env.lane_left = num(c_ll, "lane_left");
        rec.env.lane_right = num(c_lr, "lane_right");
        rec.env.intersection = num(c_int, "intersection");
        rec.env.speed = num(c_speed, "speed");
        out.push_back(std::move(rec));
    }
    return out;
}

/// Per-frame tracker export: frame index, 68 landmark pixel pairs, Euler
/// angles, and the two gaze direction vectors. Missing cells invalidate the
/// affected modality for that frame.
inline std::vector<RawFrame> read_raw_frames_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    std::vector<std::size_t> cx(kNumLandmarks), cy(kNumLandmarks);
    for (std::size_t l = 0; l < kNumLandmarks; ++l) {
        cx[l] = t.column("x_" + std::to_string(l), path);
        cy[l] = t.column("y_" + std::to_string(l), path);
    }
    const std::size_t c_pitch = t.column("pitch", path);
    const std::size_t c_yaw = t.column("yaw", path);
    const std::size_t c_roll = t.column("roll", path);
    const std::size_t gl[3] = {t.column("gaze_l_x", path), t.column("gaze_l_y", path),
                               t.column("gaze_l_z", path)};
    const std::size_t gr[3] = {t.column("gaze_r_x", path), t.column("gaze_r_y", path),
                               t.column("gaze_r_z", path)};

    std::vector<RawFrame> frames;
    frames.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        RawFrame f;
        for (std::size_t l = 0; l < kNumLandmarks; ++l) {
            if (!parse_cell(row[cx[l]], &f.x[l]) || !parse_cell(row[cy[l]], &f.y[l])) {
                f.landmarks_valid = false;
            }
        }
        if (!parse_cell(row[c_pitch], &f.pitch) || !parse_cell(row[c_yaw], &f.yaw) ||
            !parse_cell(row[c_roll], &f.roll)) {
            f.landmarks_valid = false;
        }
        for (int k = 0; k < 3; ++k) {
            if (!parse_cell(row[gl[k]], &f.gaze_left[k]) ||
                !parse_cell(row[gr[k]], &f.gaze_right[k])) {
                f.gaze_valid = false;
            }
        }
        frames.push_back(f);
    }
    return frames;
}

struct ImportLog {
    std::size_t samples = 0;
    std::size_t invalid_landmark_frames = 0;
    std::size_t gaze_dropout_frames = 0;
};

/// Featurizes every context record against its raw CSV in `input_dir`.
inline std::vector<SequenceObservation> featurize_directory(const std::string& input_dir,
                                                            const std::string& context_path,
                                                            const FeaturizeOptions& opt,
                                                            ImportLog* log = nullptr) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(input_dir)) throw IoError("input directory not found: " + input_dir);
    const auto records = read_context_csv(context_path);
    if (records.empty()) throw SchemaError("context file has no records: " + context_path);

    std::vector<SequenceObservation> out;
    for (const auto& rec : records) {
        const fs::path csv_path = fs::path(input_dir) / rec.video;
        if (!fs::exists(csv_path))
            throw IoError("raw frame CSV not found: " + csv_path.string());
        const auto frames = read_raw_frames_csv(csv_path.string());
        if (frames.empty())
            throw SchemaError("raw frame CSV has no rows: " + csv_path.string());
        FeaturizeStats stats;
        SequenceObservation obs;
        obs.id = rec.id;
        obs.driver_id = rec.driver_id;
        obs.domain = rec.domain;
        obs.label = rec.label;
        obs.frames = featurize_sequence(frames, rec.env, opt, &stats);
        out.push_back(std::move(obs));
        if (log != nullptr) {
            ++log->samples;
            log->invalid_landmark_frames += stats.invalid_landmark_frames;
            log->gaze_dropout_frames += stats.gaze_dropout_frames;
        }
    }
    return out;
}

}  // namespace darnn

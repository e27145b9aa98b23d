#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "darnn/core/error.hpp"
#include "darnn/data/observation.hpp"

namespace darnn {

/// Dataset file format: UTF-8, line-delimited JSON. First line is the schema
/// header {"schema":"darnn-dataset","version":1}; each following line is one
/// observation {id, driver_id, domain, label?, frames:[{phi,gamma,eta}]}.
/// Observations are written sorted by id, so save/load/save is byte-stable.
inline constexpr int kDatasetSchemaVersion = 1;

inline void save_dataset(const std::string& path, std::vector<SequenceObservation> seqs) {
    std::sort(seqs.begin(), seqs.end(),
              [](const SequenceObservation& a, const SequenceObservation& b) { return a.id < b.id; });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open dataset for writing: " + path);
    nlohmann::json header;
    header["schema"] = "darnn-dataset";
    header["version"] = kDatasetSchemaVersion;
    out << header.dump() << "\n";
    for (const auto& s : seqs) {
        nlohmann::json j;
        j["id"] = s.id;
        j["driver_id"] = s.driver_id;
        j["domain"] = to_string(s.domain);
        if (s.label.has_value()) j["label"] = to_string(*s.label);
        nlohmann::json frames = nlohmann::json::array();
        for (const auto& f : s.frames) {
            nlohmann::json jf;
            jf["phi"] = f.phi;
            jf["gamma"] = f.gamma;
            jf["eta"] = f.eta;
            frames.push_back(std::move(jf));
        }
        j["frames"] = std::move(frames);
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("failed writing dataset: " + path);
}

inline std::vector<SequenceObservation> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty dataset file: " + path);

    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("schema", "") != "darnn-dataset") {
        throw SchemaError("not a darnn dataset (bad header): " + path);
    }
    if (header.value("version", -1) != kDatasetSchemaVersion) {
        throw SchemaError("unsupported dataset schema version in " + path);
    }

    std::vector<SequenceObservation> seqs;
    std::size_t record = 0;
    std::size_t eta_width = 0;
    while (std::getline(in, line)) {
        ++record;
        if (line.empty()) continue;
        auto fail = [&](const std::string& field, const std::string& why) -> void {
            throw SchemaError("dataset " + path + " record " + std::to_string(record) +
                              " field '" + field + "': " + why);
        };
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) fail("-", "malformed JSON");

        SequenceObservation s;
        if (!j.contains("id") || !j["id"].is_string()) fail("id", "missing or not a string");
        s.id = j["id"].get<std::string>();
        if (!j.contains("driver_id") || !j["driver_id"].is_string())
            fail("driver_id", "missing or not a string");
        s.driver_id = j["driver_id"].get<std::string>();
        if (!j.contains("domain")) fail("domain", "missing");
        s.domain = domain_from_string(j["domain"].get<std::string>());
        if (j.contains("label")) {
            s.label = maneuver_from_string(j["label"].get<std::string>());
        } else if (s.domain == Domain::Source) {
            fail("label", "required on source-domain observations");
        }
        if (!j.contains("frames") || !j["frames"].is_array() || j["frames"].empty())
            fail("frames", "missing or empty");
        if (j["frames"].size() > 150) fail("frames", "longer than 150 frames");

        for (const auto& jf : j["frames"]) {
            FrameFeatures f;
            const auto& phi = jf.at("phi");
            const auto& gamma = jf.at("gamma");
            const auto& eta = jf.at("eta");
            if (phi.size() != kPhiDim) fail("phi", "expected 13 values");
            if (gamma.size() != kGammaDim) fail("gamma", "expected 8 values");
            if (eta.size() != 3 && eta.size() != 4) fail("eta", "expected 3 or 4 values");
            if (eta_width == 0) eta_width = eta.size();
            if (eta.size() != eta_width) fail("eta", "inconsistent width across dataset");
            for (std::size_t i = 0; i < kPhiDim; ++i) f.phi[i] = phi[i].get<double>();
            for (std::size_t i = 0; i < kGammaDim; ++i) f.gamma[i] = gamma[i].get<double>();
            f.eta.resize(eta.size());
            for (std::size_t i = 0; i < eta.size(); ++i) f.eta[i] = eta[i].get<double>();
            s.frames.push_back(std::move(f));
        }
        seqs.push_back(std::move(s));
    }
    std::sort(seqs.begin(), seqs.end(),
              [](const SequenceObservation& a, const SequenceObservation& b) { return a.id < b.id; });
    return seqs;
}

}  // namespace darnn

#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "darnn/core/error.hpp"
#include "darnn/eval/experiments.hpp"
#include "darnn/eval/metrics.hpp"

namespace darnn {

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["f1"] = r.f1;
    j["mean_ttp_seconds"] = r.mean_ttp;
    static const char* names[4] = {"lane_left", "lane_right", "turn_left", "turn_right"};
    for (int c = 0; c < 4; ++c) {
        j["per_class"][names[c]] = {{"precision", r.precision[c]},
                                    {"recall", r.recall[c]},
                                    {"support", r.support[c]}};
    }
    auto group = [](const MetricsReport::Group& g) {
        return nlohmann::json{
            {"precision", g.precision}, {"recall", g.recall}, {"f1", g.f1}, {"ttp", g.ttp}};
    };
    j["groups"]["changing_lane"] = group(r.lane_group);
    j["groups"]["turning"] = group(r.turn_group);
    j["groups"]["all_maneuvers"] =
        group({r.macro_precision, r.macro_recall, r.f1, r.mean_ttp});
    j["confusion"] = r.confusion;
    j["notes"] = r.notes;
    return j;
}

inline nlohmann::json summary_to_json(const MetricsSummary& s) {
    return nlohmann::json{
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"ttp", s.ttp}};
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw IoError("failed writing file: " + path);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline std::string format_exp2_text(const Exp2Result& r) {
    std::string out = "Leave-one-driver-out adaptation\n";
    char line[256];
    auto srow = [&](const char* name, const MetricsSummary& s) {
        std::snprintf(line, sizeof(line), "  %-22s  P %-8.4f R %-8.4f F1 %-8.4f TTP %-6.2f\n",
                      name, s.precision, s.recall, s.f1, s.ttp);
        out += line;
    };
    out += "mean over drivers:\n";
    srow("no adaptation", r.mean_no_adapt);
    srow("DA-RNN", r.mean_da);
    srow("DA-RNN + fine-tuning", r.mean_da_ft);
    for (const auto& d : r.per_driver) {
        out += "driver " + d.driver + ":\n";
        srow("no adaptation", summarize(d.no_adapt));
        srow("DA-RNN", summarize(d.da));
        srow("DA-RNN + fine-tuning", summarize(d.da_ft));
    }
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
    return out;
}

inline nlohmann::json exp2_to_json(const Exp2Result& r) {
    nlohmann::json j;
    j["mean"]["no_adaptation"] = summary_to_json(r.mean_no_adapt);
    j["mean"]["da_rnn"] = summary_to_json(r.mean_da);
    j["mean"]["da_rnn_fine_tuned"] = summary_to_json(r.mean_da_ft);
    for (const auto& d : r.per_driver) {
        nlohmann::json dj;
        dj["driver"] = d.driver;
        dj["no_adaptation"] = metrics_to_json(d.no_adapt);
        dj["da_rnn"] = metrics_to_json(d.da);
        dj["da_rnn_fine_tuned"] = metrics_to_json(d.da_ft);
        j["per_driver"].push_back(dj);
    }
    j["warnings"] = r.warnings;
    return j;
}

inline std::string format_exp3_text(const Exp3Result& r) {
    std::string out = "Cross-domain adaptation\n";
    char line[256];
    auto srow = [&](const char* name, const MetricsSummary& s) {
        std::snprintf(line, sizeof(line), "  %-22s  P %-8.4f R %-8.4f F1 %-8.4f TTP %-6.2f\n",
                      name, s.precision, s.recall, s.f1, s.ttp);
        out += line;
    };
    srow("no adaptation", summarize(r.no_adapt));
    srow("DA-RNN", summarize(r.da));
    srow("DA-RNN + fine-tuning", summarize(r.da_ft));
    out += "\n" + format_metrics_text(r.no_adapt, "condition: no adaptation");
    out += "\n" + format_metrics_text(r.da, "condition: DA-RNN");
    out += "\n" + format_metrics_text(r.da_ft, "condition: DA-RNN + fine-tuning");
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
    return out;
}

inline nlohmann::json exp3_to_json(const Exp3Result& r) {
    nlohmann::json j;
    j["no_adaptation"] = metrics_to_json(r.no_adapt);
    j["da_rnn"] = metrics_to_json(r.da);
    j["da_rnn_fine_tuned"] = metrics_to_json(r.da_ft);
    j["warnings"] = r.warnings;
    return j;
}

inline std::string format_lambda_sweep_text(const std::vector<LambdaSweepRow>& rows) {
    std::string out = "lambda     F1        TTP(s)\n";
    char line[128];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%-9.4g  %-8.4f  %-8.4f\n", r.lambda, r.f1, r.ttp);
        out += line;
    }
    return out;
}

}  // namespace darnn

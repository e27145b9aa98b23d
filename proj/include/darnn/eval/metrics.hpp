#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "darnn/data/observation.hpp"
#include "darnn/eval/anticipate.hpp"

namespace darnn {

/// Classification report over the four manoeuvre classes. "Going straight" is
/// the unscored baseline state: it participates as a wrong prediction (false
/// negative for the true class) and as a true class whose manoeuvre
/// predictions are false positives, but gets no precision/recall row of its
/// own. F1 is the harmonic mean of the macro precision and macro recall; TTP
/// averages over correct manoeuvre predictions.
struct MetricsReport {
    std::array<std::array<int, 5>, 5> confusion{};  // [true][predicted]
    std::array<double, 4> precision{};              // classes 1..4
    std::array<double, 4> recall{};
    std::array<int, 4> support{};
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double f1 = 0.0;
    double mean_ttp = 0.0;
    int correct_maneuver_predictions = 0;

    // secondary grouped columns: changing-lane, turning, all manoeuvres
    struct Group {
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
        double ttp = 0.0;
    };
    Group lane_group, turn_group;

    std::vector<std::string> notes;
};

namespace detail {

inline double harmonic_f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace detail

inline MetricsReport compute_metrics(const std::vector<AnticipationResult>& results,
                                     const std::vector<Maneuver>& truth) {
    if (results.size() != truth.size()) {
        throw ShapeError("compute_metrics: " + std::to_string(results.size()) + " results vs " +
                         std::to_string(truth.size()) + " labels");
    }
    MetricsReport rep;
    double ttp_sum = 0.0;
    std::array<double, 4> group_ttp_sum{};
    std::array<int, 4> group_ttp_n{};
    for (std::size_t i = 0; i < results.size(); ++i) {
        const int t = static_cast<int>(truth[i]);
        const int p = static_cast<int>(results[i].predicted);
        rep.confusion[t][p] += 1;
        if (t == p && t != 0) {
            ttp_sum += results[i].ttp_seconds;
            ++rep.correct_maneuver_predictions;
            group_ttp_sum[t - 1] += results[i].ttp_seconds;
            ++group_ttp_n[t - 1];
        }
    }
    rep.mean_ttp = rep.correct_maneuver_predictions > 0
                       ? ttp_sum / rep.correct_maneuver_predictions
                       : 0.0;

    std::array<double, 4> per_class_p{}, per_class_r{};
    for (int c = 1; c <= 4; ++c) {
        int tp = rep.confusion[c][c];
        int fp = 0, fn = 0, sup = 0;
        for (int t = 0; t < 5; ++t) {
            if (t != c) fp += rep.confusion[t][c];
        }
        for (int p = 0; p < 5; ++p) {
            sup += rep.confusion[c][p];
            if (p != c) fn += rep.confusion[c][p];
        }
        rep.support[c - 1] = sup;
        per_class_p[c - 1] = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        per_class_r[c - 1] = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        rep.precision[c - 1] = per_class_p[c - 1];
        rep.recall[c - 1] = per_class_r[c - 1];
    }

    auto macro_over = [&](std::vector<int> classes) {
        MetricsReport::Group g;
        int n = 0;
        double tsum = 0.0;
        int tn = 0;
        for (int c : classes) {
            if (rep.support[c - 1] == 0) continue;
            g.precision += per_class_p[c - 1];
            g.recall += per_class_r[c - 1];
            tsum += group_ttp_sum[c - 1];
            tn += group_ttp_n[c - 1];
            ++n;
        }
        if (n > 0) {
            g.precision /= n;
            g.recall /= n;
        }
        g.f1 = detail::harmonic_f1(g.precision, g.recall);
        g.ttp = tn > 0 ? tsum / tn : 0.0;
        return g;
    };

    for (int c = 1; c <= 4; ++c) {
        if (rep.support[c - 1] == 0) {
            rep.notes.push_back(std::string("class ") +
                                to_string(static_cast<Maneuver>(c)) +
                                " has zero support; excluded from macro averages");
        }
    }

    const auto all = macro_over({1, 2, 3, 4});
    rep.macro_precision = all.precision;
    rep.macro_recall = all.recall;
    rep.f1 = all.f1;
    rep.lane_group = macro_over({1, 2});
    rep.turn_group = macro_over({3, 4});
    return rep;
}

/// Plain-text table in the grouped layout (changing lane / turning / all).
inline std::string format_metrics_text(const MetricsReport& rep, const std::string& title) {
    char line[256];
    std::string out;
    out += title + "\n";
    out += "                    Prec      Recall    F1        TTP(s)\n";
    auto row = [&](const char* name, const MetricsReport::Group& g) {
        std::snprintf(line, sizeof(line), "  %-16s  %- 8.4f  %- 8.4f  %- 8.4f  %- 8.4f\n", name,
                      g.precision, g.recall, g.f1, g.ttp);
        out += line;
    };
    row("Changing lane", rep.lane_group);
    row("Turning", rep.turn_group);
    MetricsReport::Group all{rep.macro_precision, rep.macro_recall, rep.f1, rep.mean_ttp};
    row("All manoeuvres", all);
    out += "  per-class precision/recall:\n";
    static const char* names[4] = {"lane_left", "lane_right", "turn_left", "turn_right"};
    for (int c = 0; c < 4; ++c) {
        std::snprintf(line, sizeof(line), "    %-11s P=%-8.4f R=%-8.4f support=%d\n", names[c],
                      rep.precision[c], rep.recall[c], rep.support[c]);
        out += line;
    }
    out += "  confusion (rows true, cols predicted; order S,LL,LR,TL,TR):\n";
    for (int t = 0; t < 5; ++t) {
        std::snprintf(line, sizeof(line), "    %4d %4d %4d %4d %4d\n", rep.confusion[t][0],
                      rep.confusion[t][1], rep.confusion[t][2], rep.confusion[t][3],
                      rep.confusion[t][4]);
        out += line;
    }
    for (const auto& n : rep.notes) out += "  note: " + n + "\n";
    return out;
}

}  // namespace darnn

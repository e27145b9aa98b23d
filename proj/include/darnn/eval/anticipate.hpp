#pragma once

#include <optional>

#include "darnn/data/observation.hpp"
#include "darnn/net/model.hpp"

namespace darnn {

/// Outcome of online threshold anticipation on one sequence. `t_star` is
/// 1-based; time-to-prediction is (T - t*)/30 seconds. Without a threshold
/// crossing the default action (straight) is predicted with TTP 0.
struct AnticipationResult {
    Maneuver predicted = Maneuver::Straight;
    std::optional<int> t_star;
    double ttp_seconds = 0.0;
    Mat<double> trajectory;  // T×J class probabilities
};

/// Scans t = 1..T and locks the prediction at the first timestep where any
/// manoeuvre-class probability reaches p_th; later frames cannot revise it.
/// Going straight is the baseline state and never locks a prediction: it is
/// emitted as the default action when no manoeuvre crosses the threshold by
/// t = T, with TTP 0.
inline AnticipationResult anticipate_from_trajectory(Mat<double> trajectory, double p_th) {
    if (trajectory.rows == 0) throw SchemaError("anticipate: empty sequence");
    AnticipationResult r;
    const Index T = trajectory.rows;
    const Index J = trajectory.cols;
    r.trajectory = std::move(trajectory);
    for (Index t = 0; t < T; ++t) {
        Index best = 1;
        double best_p = r.trajectory(t, 1);
        for (Index j = 2; j < J; ++j) {
            if (r.trajectory(t, j) > best_p) {
                best_p = r.trajectory(t, j);
                best = j;
            }
        }
        if (best_p >= p_th) {
            r.predicted = static_cast<Maneuver>(static_cast<int>(best));
            r.t_star = static_cast<int>(t) + 1;
            r.ttp_seconds = static_cast<double>(T - (t + 1)) / kFrameRate;
            return r;
        }
    }
    r.predicted = Maneuver::Straight;
    r.t_star = std::nullopt;
    r.ttp_seconds = 0.0;
    return r;
}

/// Runs the model over the sequence in inference mode (dropout off) and
/// applies the online threshold rule to the probability trajectory.
template <class Real>
inline AnticipationResult anticipate(const DaRnnModel<Real>& model, const SeqTensor<Real>& x,
                                     double p_th = 0.9) {
    if (x.length() == 0) throw SchemaError("anticipate: empty sequence");
    const auto cache = extractor_forward(model, x, RunMode::Infer);
    const auto probs = maneuver_probs(model, cache.zd);
    Mat<double> trajectory(probs.rows, probs.cols);
    for (Index i = 0; i < probs.size(); ++i) trajectory.a[i] = static_cast<double>(probs.a[i]);
    return anticipate_from_trajectory(std::move(trajectory), p_th);
}

}  // namespace darnn

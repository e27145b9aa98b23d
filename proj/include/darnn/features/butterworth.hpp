#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"

namespace darnn {

/// Causal even-order Butterworth low-pass, designed by the bilinear transform
/// with frequency prewarping and realized as a cascade of second-order
/// sections. Single-direction (no forward-backward pass), so it can run in
/// real time; DC gain is exactly 1 by construction.
class ButterworthLowPass {
public:
    ButterworthLowPass(int order, double sample_rate_hz, double cutoff_hz) {
        if (order < 2 || order % 2 != 0)
            throw ConfigError("Butterworth order must be even and >= 2, got " +
                              std::to_string(order));
        if (sample_rate_hz <= 0.0 || cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
            throw ConfigError("Butterworth cutoff must satisfy 0 < fc < fs/2");
        const int n = order / 2;
        const double a = std::tan(kPi * cutoff_hz / sample_rate_hz);
        const double a2 = a * a;
        stages_.resize(n);
        for (int i = 0; i < n; ++i) {
            const double r = std::sin(kPi * (2.0 * i + 1.0) / (4.0 * n));
            const double s = a2 + 2.0 * a * r + 1.0;
            stages_[i].gain = a2 / s;
            stages_[i].d1 = 2.0 * (1.0 - a2) / s;
            stages_[i].d2 = -(a2 - 2.0 * a * r + 1.0) / s;
        }
        reset();
    }

    void reset() {
        for (auto& st : stages_) st.w1 = st.w2 = 0.0;
    }

    /// Sets the internal state to the steady-state response of a constant
    /// input, removing the cold-start transient.
    void prime(double x0) {
        for (auto& st : stages_) {
            const double w = x0 / (1.0 - st.d1 - st.d2);
            st.w1 = st.w2 = w;
        }
    }

    double process(double x) {
        for (auto& st : stages_) {
            const double w0 = st.d1 * st.w1 + st.d2 * st.w2 + x;
            x = st.gain * (w0 + 2.0 * st.w1 + st.w2);
            st.w2 = st.w1;
            st.w1 = w0;
        }
        return x;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    struct Stage {
        double gain = 0.0, d1 = 0.0, d2 = 0.0;
        double w1 = 0.0, w2 = 0.0;
    };
    std::vector<Stage> stages_;
};

}  // namespace darnn

#pragma once

// Test-side oracles. The finite-difference machinery here never touches any
// analytic backward path: it only re-runs forward closures. Keep it that way.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "darnn/core/mat.hpp"

namespace oracle {

/// Relative error with a magnitude floor: below the floor the comparison
/// degrades to an absolute check scaled by the floor, which is where central
/// differences stop resolving (roundoff ~ eps*|f|/step).
inline double rel_err(double analytic, double numeric, double floor_scale) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor_scale});
    return std::abs(analytic - numeric) / denom;
}

struct FdReport {
    double max_err = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Central finite differences over every scalar reachable through `params`
/// (a list of named tensors), compared against `analytic` in the same order.
/// `forward` must be a pure function of the current parameter values.
template <class Real>
inline FdReport fd_check(std::vector<std::pair<std::string, darnn::Mat<Real>*>> params,
                         std::vector<std::pair<std::string, const darnn::Mat<Real>*>> analytic,
                         const std::function<double()>& forward, double step,
                         double floor_scale) {
    FdReport rep;
    for (std::size_t p = 0; p < params.size(); ++p) {
        darnn::Mat<Real>& m = *params[p].second;
        const darnn::Mat<Real>& g = *analytic[p].second;
        for (darnn::Index i = 0; i < m.size(); ++i) {
            const Real saved = m.a[i];
            m.a[i] = saved + static_cast<Real>(step);
            const double f_plus = forward();
            m.a[i] = saved - static_cast<Real>(step);
            const double f_minus = forward();
            m.a[i] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * step);
            const double a = static_cast<double>(g.a[i]);
            const double err = rel_err(a, numeric, floor_scale);
            if (err > rep.max_err) {
                rep.max_err = err;
                rep.worst_tensor = params[p].first;
                rep.worst_index = i;
                rep.worst_analytic = a;
                rep.worst_numeric = numeric;
            }
        }
    }
    return rep;
}

/// Analog 4th-order Butterworth magnitude response, |H| = (1+(f/fc)^8)^-1/2.
/// Used as the analytic attenuation oracle (digital warping only increases
/// attenuation below Nyquist for a low-pass).
inline double butterworth4_magnitude(double f, double fc) {
    const double r = f / fc;
    return 1.0 / std::sqrt(1.0 + std::pow(r, 8.0));
}

}  // namespace oracle
